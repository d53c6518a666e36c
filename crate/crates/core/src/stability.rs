//! Quotient dynamics, variational equations and per-block Lyapunov exponents.
//!
//! Node states have dimension m. Perturbation vectors are indexed in the
//! cluster-contiguous node order for the full equation and in permuted
//! transformed coordinates for the transformed one, m entries per node or
//! coordinate.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SbdError};
use crate::partition::IndicatorSet;
use crate::transform::{block_tuples, BlockClass, BlockTuple, CanonicalTransform};

/// Node dynamics F and coupling H with their Jacobians (row-major m×m).
pub trait Dynamics: Send + Sync {
    fn dim(&self) -> usize;
    fn f(&self, x: &[f64], out: &mut [f64]);
    fn h(&self, x: &[f64], out: &mut [f64]);

    fn df(&self, x: &[f64], out: &mut [f64]) {
        fd_jacobian(&|x, o| self.f(x, o), x, out);
    }

    fn dh(&self, x: &[f64], out: &mut [f64]) {
        fd_jacobian(&|x, o| self.h(x, o), x, out);
    }

    fn name(&self) -> String;
}

/// Central-difference Jacobian with step 1e-6 relative.
pub fn fd_jacobian(g: &dyn Fn(&[f64], &mut [f64]), x: &[f64], out: &mut [f64]) {
    let m = x.len();
    let mut xp = x.to_vec();
    let mut fp = vec![0.0; m];
    let mut fm = vec![0.0; m];
    for j in 0..m {
        let step = 1e-6 * x[j].abs().max(1.0);
        xp[j] = x[j] + step;
        g(&xp, &mut fp);
        xp[j] = x[j] - step;
        g(&xp, &mut fm);
        xp[j] = x[j];
        for i in 0..m {
            out[i * m + j] = (fp[i] - fm[i]) / (2.0 * step);
        }
    }
}

/// F(x) = a·x, H(x) = h·x on scalar states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Linear {
    pub a: f64,
    pub h: f64,
}

impl Dynamics for Linear {
    fn dim(&self) -> usize {
        1
    }
    fn f(&self, x: &[f64], out: &mut [f64]) {
        out[0] = self.a * x[0];
    }
    fn h(&self, x: &[f64], out: &mut [f64]) {
        out[0] = self.h * x[0];
    }
    fn df(&self, _x: &[f64], out: &mut [f64]) {
        out[0] = self.a;
    }
    fn dh(&self, _x: &[f64], out: &mut [f64]) {
        out[0] = self.h;
    }
    fn name(&self) -> String {
        format!("linear(a={}, h={})", self.a, self.h)
    }
}

/// Lorenz flow coupled through the first state component: H(x) = k·(x₁, 0, 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lorenz {
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
    pub coupling: f64,
}

impl Default for Lorenz {
    fn default() -> Self {
        Lorenz { sigma: 10.0, rho: 28.0, beta: 8.0 / 3.0, coupling: -0.1 }
    }
}

impl Dynamics for Lorenz {
    fn dim(&self) -> usize {
        3
    }
    fn f(&self, x: &[f64], out: &mut [f64]) {
        out[0] = self.sigma * (x[1] - x[0]);
        out[1] = x[0] * (self.rho - x[2]) - x[1];
        out[2] = x[0] * x[1] - self.beta * x[2];
    }
    fn h(&self, x: &[f64], out: &mut [f64]) {
        out[0] = self.coupling * x[0];
        out[1] = 0.0;
        out[2] = 0.0;
    }
    fn df(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&[
            -self.sigma,
            self.sigma,
            0.0,
            self.rho - x[2],
            -1.0,
            -x[0],
            x[1],
            x[0],
            -self.beta,
        ]);
    }
    fn dh(&self, _x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        out[0] = self.coupling;
    }
    fn name(&self) -> String {
        format!(
            "lorenz(sigma={}, rho={}, beta={}, coupling={})",
            self.sigma, self.rho, self.beta, self.coupling
        )
    }
}

/// Looks up a preset by name: `linear` (params a, h) or `lorenz`
/// (params sigma, rho, beta, coupling).
pub fn preset(name: &str, params: &BTreeMap<String, f64>) -> Result<Box<dyn Dynamics>> {
    let get = |k: &str, d: f64| params.get(k).copied().unwrap_or(d);
    let allowed: &[&str] = match name {
        "linear" => &["a", "h"],
        "lorenz" => &["sigma", "rho", "beta", "coupling"],
        _ => return Err(SbdError::InvalidArgument(format!("unknown dynamics preset {name:?} (linear, lorenz)"))),
    };
    if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(SbdError::InvalidArgument(format!("preset {name} has no parameter {k:?}")));
    }
    Ok(match name {
        "linear" => Box::new(Linear { a: get("a", 0.1), h: get("h", -0.5) }),
        _ => {
            let d = Lorenz::default();
            Box::new(Lorenz {
                sigma: get("sigma", d.sigma),
                rho: get("rho", d.rho),
                beta: get("beta", d.beta),
                coupling: get("coupling", d.coupling),
            })
        }
    })
}

/// Fixed-step solution of the quotient equation on a uniform grid.
#[derive(Debug, Clone)]
pub struct QuotientTrajectory {
    pub times: Vec<f64>,
    /// One C·m vector per grid time, cluster-major.
    pub states: Vec<Vec<f64>>,
    pub dt: f64,
    pub m: usize,
    pub c: usize,
    pub scheme: &'static str,
}

impl QuotientTrajectory {
    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    /// Linear interpolation between grid points, clamped to the grid.
    pub fn state_at(&self, t: f64) -> Vec<f64> {
        let s = (t / self.dt).max(0.0);
        let k = (s.floor() as usize).min(self.steps());
        if k == self.steps() {
            return self.states[k].clone();
        }
        let w = s - k as f64;
        self.states[k].iter().zip(&self.states[k + 1]).map(|(a, b)| a + w * (b - a)).collect()
    }
}

fn rk4_step(rhs: &dyn Fn(f64, &[f64]) -> Vec<f64>, t: f64, x: &[f64], dt: f64) -> Vec<f64> {
    let axpy = |a: &[f64], s: f64, b: &[f64]| a.iter().zip(b).map(|(x, y)| x + s * y).collect::<Vec<_>>();
    let k1 = rhs(t, x);
    let k2 = rhs(t + 0.5 * dt, &axpy(x, 0.5 * dt, &k1));
    let k3 = rhs(t + 0.5 * dt, &axpy(x, 0.5 * dt, &k2));
    let k4 = rhs(t + dt, &axpy(x, dt, &k3));
    (0..x.len())
        .map(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

fn n_steps(t_end: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !(t_end > 0.0) {
        return Err(SbdError::InvalidArgument(format!("need dt > 0 and t_end > 0, got dt={dt}, t_end={t_end}")));
    }
    Ok((t_end / dt).round().max(1.0) as usize)
}

/// RK4 integration of ṡ_k = F(s_k) + Σ_l Q_kl H(s_l).
pub fn quotient_integrate(
    ind: &IndicatorSet,
    dyn_: &dyn Dynamics,
    x0: &[f64],
    t_end: f64,
    dt: f64,
) -> Result<QuotientTrajectory> {
    let m = dyn_.dim();
    let c = ind.n_cells();
    if x0.len() != c * m {
        return Err(SbdError::InvalidArgument(format!("x0 has {} entries, expected C·m = {}", x0.len(), c * m)));
    }
    let steps = n_steps(t_end, dt)?;
    let q = &ind.q;
    let rhs = |_t: f64, s: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; c * m];
        let mut hv = vec![0.0; c * m];
        for l in 0..c {
            dyn_.h(&s[l * m..(l + 1) * m], &mut hv[l * m..(l + 1) * m]);
        }
        for k in 0..c {
            dyn_.f(&s[k * m..(k + 1) * m], &mut out[k * m..(k + 1) * m]);
            for l in 0..c {
                let w = q[(k, l)];
                if w != 0.0 {
                    for i in 0..m {
                        out[k * m + i] += w * hv[l * m + i];
                    }
                }
            }
        }
        out
    };
    let mut times = vec![0.0];
    let mut states = vec![x0.to_vec()];
    for k in 0..steps {
        let x = rk4_step(&rhs, k as f64 * dt, states.last().unwrap(), dt);
        let t = (k + 1) as f64 * dt;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SbdError::Diverged { time: t });
        }
        times.push(t);
        states.push(x);
    }
    Ok(QuotientTrajectory { times, states, dt, m, c, scheme: "rk4" })
}

/// DF and DH at each cluster's quotient state at time t.
fn jacobians(dyn_: &dyn Dynamics, traj: &QuotientTrajectory, t: f64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let m = traj.m;
    let s = traj.state_at(t);
    let mut jf = Vec::with_capacity(traj.c);
    let mut jh = Vec::with_capacity(traj.c);
    for k in 0..traj.c {
        let x = &s[k * m..(k + 1) * m];
        let mut a = vec![0.0; m * m];
        let mut b = vec![0.0; m * m];
        dyn_.df(x, &mut a);
        dyn_.dh(x, &mut b);
        jf.push(a);
        jh.push(b);
    }
    (jf, jh)
}

fn matvec(j: &[f64], x: &[f64], out: &mut [f64], m: usize) {
    for i in 0..m {
        out[i] = (0..m).map(|k| j[i * m + k] * x[k]).sum();
    }
}

/// out_u = DF(s_c(u)) v_u + Σ_w M_uw DH(s_c(w)) v_w.
fn coupled_rhs(mat: &Mat<f64>, clusters: &[usize], jf: &[Vec<f64>], jh: &[Vec<f64>], v: &[f64], m: usize) -> Vec<f64> {
    let n = clusters.len();
    let mut y = vec![0.0; n * m];
    for w in 0..n {
        matvec(&jh[clusters[w]], &v[w * m..(w + 1) * m], &mut y[w * m..(w + 1) * m], m);
    }
    let mut out = vec![0.0; n * m];
    for u in 0..n {
        matvec(&jf[clusters[u]], &v[u * m..(u + 1) * m], &mut out[u * m..(u + 1) * m], m);
        for w in 0..n {
            let a = mat[(u, w)];
            if a != 0.0 {
                for i in 0..m {
                    out[u * m + i] += a * y[w * m + i];
                }
            }
        }
    }
    out
}

/// Right-hand side of the full variational equation, without forming the Nm×Nm matrix.
pub fn full_variational_rhs(
    ind: &IndicatorSet,
    dyn_: &dyn Dynamics,
    traj: &QuotientTrajectory,
    t: f64,
    dx: &[f64],
) -> Vec<f64> {
    let (jf, jh) = jacobians(dyn_, traj, t);
    coupled_rhs(&ind.a, &ind.position_clusters(), &jf, &jh, dx, traj.m)
}

/// Right-hand side of the transformed variational equation using the full B.
pub fn transformed_variational_rhs(
    ct: &CanonicalTransform,
    dyn_: &dyn Dynamics,
    traj: &QuotientTrajectory,
    t: f64,
    eta: &[f64],
) -> Vec<f64> {
    let (jf, jh) = jacobians(dyn_, traj, t);
    coupled_rhs(&ct.b, &ct.coord_clusters, &jf, &jh, eta, traj.m)
}

/// Right-hand side restricted to one block tuple.
pub fn block_variational_rhs(
    tuple: &BlockTuple,
    dyn_: &dyn Dynamics,
    traj: &QuotientTrajectory,
    t: f64,
    eta: &[f64],
) -> Vec<f64> {
    let (jf, jh) = jacobians(dyn_, traj, t);
    coupled_rhs(&tuple.b_hat, &tuple.coord_clusters(), &jf, &jh, eta, traj.m)
}

/// (Tᵀ ⊗ I_m) v.
pub fn to_transformed(ct: &CanonicalTransform, v: &[f64], m: usize) -> Vec<f64> {
    let n = ct.t.nrows();
    let mut out = vec![0.0; n * m];
    for u in 0..n {
        for r in 0..n {
            let w = ct.t[(r, u)];
            if w != 0.0 {
                for i in 0..m {
                    out[u * m + i] += w * v[r * m + i];
                }
            }
        }
    }
    out
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Integrates a linear variational system over the trajectory grid, returning
/// the state at every grid time.
pub fn integrate_linear(
    rhs: &dyn Fn(f64, &[f64]) -> Vec<f64>,
    x0: &[f64],
    traj: &QuotientTrajectory,
) -> Result<Vec<Vec<f64>>> {
    let mut out = vec![x0.to_vec()];
    for k in 0..traj.steps() {
        let x = rk4_step(rhs, traj.times[k], out.last().unwrap(), traj.dt);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SbdError::Diverged { time: traj.times[k + 1] });
        }
        out.push(x);
    }
    Ok(out)
}

/// Divergence between the two variational forms along a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    /// max_t ‖η(t) − (Tᵀ⊗I)δx(t)‖ / ‖η(t)‖.
    pub max_rel_divergence: f64,
    /// max over blocks k and t of the mass outside block k, relative to ‖η(t)‖,
    /// when η starts inside block k.
    pub max_leakage: f64,
}

/// Integrates both forms from conjugated initial conditions and measures
/// divergence and block leakage.
pub fn equivalence_check(
    ct: &CanonicalTransform,
    ind: &IndicatorSet,
    dyn_: &dyn Dynamics,
    traj: &QuotientTrajectory,
    dx0: &[f64],
) -> Result<EquivalenceReport> {
    let m = traj.m;
    let full = |t: f64, v: &[f64]| full_variational_rhs(ind, dyn_, traj, t, v);
    let tr = |t: f64, v: &[f64]| transformed_variational_rhs(ct, dyn_, traj, t, v);
    let xs = integrate_linear(&full, dx0, traj)?;
    let eta0 = to_transformed(ct, dx0, m);
    let es = integrate_linear(&tr, &eta0, traj)?;
    let mut max_rel_divergence = 0.0f64;
    for (x, e) in xs.iter().zip(&es) {
        let te = to_transformed(ct, x, m);
        let d: Vec<f64> = te.iter().zip(e).map(|(a, b)| a - b).collect();
        let ne = norm(e);
        if ne > 0.0 {
            max_rel_divergence = max_rel_divergence.max(norm(&d) / ne);
        }
    }
    let mut max_leakage = 0.0f64;
    for blk in &ct.blocks {
        let range = blk.range();
        let mut e0 = vec![0.0; eta0.len()];
        for u in range.clone() {
            for i in 0..m {
                e0[u * m + i] = 1.0 + 0.1 * (u * m + i) as f64;
            }
        }
        let es = integrate_linear(&tr, &e0, traj)?;
        for e in &es {
            let outside: f64 = (0..ct.t.ncols())
                .filter(|u| !range.contains(u))
                .flat_map(|u| (0..m).map(move |i| u * m + i))
                .map(|k| e[k] * e[k])
                .sum::<f64>()
                .sqrt();
            let ne = norm(e);
            if ne > 0.0 {
                max_leakage = max_leakage.max(outside / ne);
            }
        }
    }
    Ok(EquivalenceReport { max_rel_divergence, max_leakage })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovOptions {
    /// Re-orthonormalize every this many steps.
    pub qr_every: usize,
    /// Fraction of the steps discarded as transient.
    pub transient_frac: f64,
}

impl Default for LyapunovOptions {
    fn default() -> Self {
        LyapunovOptions { qr_every: 10, transient_frac: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockExponents {
    pub block: usize,
    pub class: BlockClass,
    pub size: usize,
    /// Descending.
    pub exponents: Vec<f64>,
    pub warning: Option<String>,
}

impl BlockExponents {
    pub fn max_exponent(&self) -> f64 {
        self.exponents.first().copied().unwrap_or(f64::NEG_INFINITY)
    }
}

/// The β·m × β·m matrix of a block's variational equation at time t.
fn block_matrix(tuple: &BlockTuple, clusters: &[usize], jf: &[Vec<f64>], jh: &[Vec<f64>], m: usize) -> Mat<f64> {
    let beta = tuple.dim();
    let mut mat = Mat::<f64>::zeros(beta * m, beta * m);
    for u in 0..beta {
        let f = &jf[clusters[u]];
        for i in 0..m {
            for k in 0..m {
                mat[(u * m + i, u * m + k)] += f[i * m + k];
            }
        }
        for w in 0..beta {
            let b = tuple.b_hat[(u, w)];
            if b == 0.0 {
                continue;
            }
            let h = &jh[clusters[w]];
            for i in 0..m {
                for k in 0..m {
                    mat[(u * m + i, w * m + k)] += b * h[i * m + k];
                }
            }
        }
    }
    mat
}

/// Lyapunov exponents of one block by QR re-orthonormalization of an
/// orthonormal frame integrated along the quotient trajectory.
pub fn transverse_exponents(
    ct: &CanonicalTransform,
    ind: &IndicatorSet,
    dyn_: &dyn Dynamics,
    traj: &QuotientTrajectory,
    block: usize,
    opts: LyapunovOptions,
) -> Result<BlockExponents> {
    let tuples = block_tuples(ct, ind);
    let tuple = tuples
        .get(block)
        .ok_or_else(|| SbdError::InvalidArgument(format!("block {block} out of range 0..{}", tuples.len())))?;
    exponents_for_tuple(tuple, dyn_, traj, opts)
}

pub fn exponents_for_tuple(
    tuple: &BlockTuple,
    dyn_: &dyn Dynamics,
    traj: &QuotientTrajectory,
    opts: LyapunovOptions,
) -> Result<BlockExponents> {
    if opts.qr_every == 0 || !(0.0..1.0).contains(&opts.transient_frac) {
        return Err(SbdError::InvalidArgument("qr_every must be positive and transient_frac in [0, 1)".into()));
    }
    let m = traj.m;
    let d = tuple.dim() * m;
    let clusters = tuple.coord_clusters();
    let steps = traj.steps();
    let transient = ((steps as f64 * opts.transient_frac) as usize / opts.qr_every) * opts.qr_every;
    let mat_at = |t: f64| {
        let (jf, jh) = jacobians(dyn_, traj, t);
        block_matrix(tuple, &clusters, &jf, &jh, m)
    };
    let mut y = Mat::<f64>::identity(d, d);
    let mut sums = vec![0.0; d];
    let mut accumulated = 0.0;
    let mut last_qr = 0;
    for k in 0..steps {
        let t = traj.times[k];
        let dt = traj.dt;
        let (m1, m2, m3) = (mat_at(t), mat_at(t + 0.5 * dt), mat_at(t + dt));
        let k1 = &m1 * &y;
        let y2 = &y + &k1 * (0.5 * dt);
        let k2 = &m2 * &y2;
        let y3 = &y + &k2 * (0.5 * dt);
        let k3 = &m2 * &y3;
        let y4 = &y + &k3 * dt;
        let k4 = &m3 * &y4;
        y = &y + (&k1 + &k2 * 2.0 + &k3 * 2.0 + &k4) * (dt / 6.0);
        let step = k + 1;
        if step % opts.qr_every == 0 || step == steps {
            let qr = y.qr();
            let r = qr.R();
            let counted = last_qr >= transient;
            for i in 0..d {
                let v = r[(i, i)].abs();
                if !(v > 0.0 && v.is_finite()) {
                    return Err(SbdError::Diverged { time: traj.times[step] });
                }
                if counted {
                    sums[i] += v.ln();
                }
            }
            if counted {
                accumulated += (step - last_qr) as f64 * dt;
            }
            y = qr.compute_Q();
            last_qr = step;
        }
    }
    let mut exponents: Vec<f64> = if accumulated > 0.0 {
        sums.iter().map(|s| s / accumulated).collect()
    } else {
        vec![f64::NAN; d]
    };
    exponents.sort_by(|a, b| b.total_cmp(a));
    let warning = (tuple.class == BlockClass::Parallel)
        .then(|| "parallel block: exponents include those of the quotient dynamics".to_string());
    Ok(BlockExponents { block: tuple.index, class: tuple.class, size: tuple.dim(), exponents, warning })
}

/// Exponents for every block.
pub fn all_exponents(
    ct: &CanonicalTransform,
    ind: &IndicatorSet,
    dyn_: &dyn Dynamics,
    traj: &QuotientTrajectory,
    opts: LyapunovOptions,
) -> Result<Vec<BlockExponents>> {
    block_tuples(ct, ind)
        .iter()
        .map(|t| exponents_for_tuple(t, dyn_, traj, opts))
        .collect()
}

/// CSV with header `block,class,size,max_exponent,exponents`; exponents are `;`-separated.
pub fn exponents_csv(rows: &[BlockExponents]) -> String {
    let mut s = String::from("block,class,size,max_exponent,exponents\n");
    for r in rows {
        let class = match r.class {
            BlockClass::Parallel => "parallel",
            BlockClass::Transverse => "transverse",
        };
        let ex: Vec<String> = r.exponents.iter().map(|e| format!("{e:.10}")).collect();
        let _ = writeln!(s, "{},{},{},{:.10},{}", r.block, class, r.size, r.max_exponent(), ex.join(";"));
    }
    s
}
