//! h-vector fields: construction, residual diagnostics, covariant-derivative
//! tensors, and a least-squares existence probe.
//!
//! A *weak* field satisfies `L ∂̇_j b_i = ρ₀ h_ij` identically — it is built
//! as `b = ρ₀ l + c(x)`, which makes that identity hold by construction.  The
//! full h-vector condition `L C^h_ij b_h = ρ h_ij` is a separate, generally
//! unattainable constraint on real metrics; its residual is always reported,
//! never assumed.

use crate::error::{HmxError, Result};
use crate::expr::Poly;
use crate::jets::{Jet, JetSpace};
use crate::linalg;
use crate::point::PointDirection;
use crate::space::{FinslerSpace, TensorFrame, TAU_POLE_GUARD};
use crate::tensor::{dot, t1, t2, Ten1, Ten2, Ten3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HVectorMode {
    Weak,
    Fixture,
    Searched,
}

/// A covector field `b_i(x, y) = ρ₀ l_i + c_i(x)` with constant `ρ₀ ≠ 0`.
#[derive(Debug, Clone)]
pub struct HVectorField {
    pub rho0: f64,
    pub c: Vec<Poly>,
    pub mode: HVectorMode,
}

impl HVectorField {
    pub fn weak(rho0: f64, c: Vec<Poly>) -> Result<HVectorField> {
        if rho0 == 0.0 {
            return Err(HmxError::config("h-vector scalar ρ₀ must be nonzero"));
        }
        Ok(HVectorField {
            rho0,
            c,
            mode: HVectorMode::Weak,
        })
    }

    /// Weak field with a constant one-form part.
    pub fn weak_const(rho0: f64, c: &[f64]) -> Result<HVectorField> {
        HVectorField::weak(rho0, c.iter().map(|&v| Poly::constant(v)).collect())
    }

    /// Component jets `b_i = ρ₀ ∂̇_i L + c_i(x)`; `base_l` must live one
    /// y-order above the target space.
    pub fn b_jets(
        &self,
        base_l: &Jet,
        target: &std::sync::Arc<JetSpace>,
        x: &[f64],
    ) -> Result<Vec<Jet>> {
        let n = target.ny;
        if self.c.len() != n {
            return Err(HmxError::config(format!(
                "h-vector one-form has {} components, space has dimension {n}",
                self.c.len()
            )));
        }
        (0..n)
            .map(|i| {
                let li = base_l.y_derivative(i, target)?;
                Ok(li.scale(self.rho0).add(&self.c[i].eval_jet(target, x)))
            })
            .collect()
    }
}

/// Pointwise data of an h-vector field: values, the change scalars `β`, `τ`,
/// `m_i`, and the covariant-derivative tensors with their y-contractions
/// (a `0` subscript denotes contraction with `y`).
#[derive(Debug, Clone)]
pub struct HVectorData {
    pub rho0: f64,
    pub b: Ten1,
    pub beta: f64,
    pub tau: f64,
    pub m: Ten1,
    pub m2: f64,
    /// `b_{i|j}`
    pub b_cov: Ten2,
    /// symmetric part `E_ij`
    pub e: Ten2,
    /// antisymmetric part `F_ij`
    pub f: Ten2,
    /// `β_j = β_{|j}`
    pub beta_j: Ten1,
    /// `ρ_k = ∂_k ρ` (identically zero: ρ is constant in construction mode)
    pub rho_k: Ten1,
    pub e00: f64,
    pub ej0: Ten1,
    pub fj0: Ten1,
    /// `F^i_0 = g^{is} F_{s0}`
    pub f_up0: Ten1,
    /// `F_{β0} = F_{s0} m^s`
    pub f_beta0: f64,
}

impl HVectorData {
    /// Builds the data record from explicitly given parts (fixtures and
    /// what-if inputs); all y-contractions are derived here.
    #[allow(clippy::too_many_arguments)]
    pub fn synthetic(
        rho0: f64,
        b: Ten1,
        beta: f64,
        tau: f64,
        m: Ten1,
        m2: f64,
        e: Ten2,
        f: Ten2,
        g_inv: &Ten2,
        y: &[f64],
    ) -> HVectorData {
        let n = e.n;
        let mut data = HVectorData {
            rho0,
            b,
            beta,
            tau,
            m,
            m2,
            b_cov: t2(n, |i, j| e.get(i, j) + f.get(i, j)),
            e,
            f,
            beta_j: vec![0.0; n],
            rho_k: vec![0.0; n],
            e00: 0.0,
            ej0: vec![0.0; n],
            fj0: vec![0.0; n],
            f_up0: vec![0.0; n],
            f_beta0: 0.0,
        };
        data.recontract(g_inv, y);
        data
    }

    /// Derivative tensors injected directly (the parallel / gradient what-if
    /// inputs of the collapse checks).
    pub fn with_injected(mut self, e: Ten2, f: Ten2, g_inv: &Ten2, y: &[f64]) -> HVectorData {
        let n = e.n;
        self.b_cov = t2(n, |i, j| e.get(i, j) + f.get(i, j));
        self.e = e;
        self.f = f;
        self.rho_k = vec![0.0; n];
        self.recontract(g_inv, y);
        self
    }

    fn recontract(&mut self, g_inv: &Ten2, y: &[f64]) {
        let n = self.e.n;
        self.e00 = self.e.bilinear(y, y);
        self.ej0 = self.e.mul_vec(y);
        self.fj0 = self.f.mul_vec(y);
        // β_j = b_{i|j} y^i = E_j0 − F_j0
        self.beta_j = t1(n, |j| self.ej0[j] - self.fj0[j]);
        self.f_up0 = g_inv.mul_vec(&self.fj0);
        let m_up = g_inv.mul_vec(&self.m);
        self.f_beta0 = dot(&self.fj0, &m_up);
    }
}

/// Evaluates an h-vector field on a frame: values plus `E`, `F`, `β_j`, `ρ_k`
/// and the y-contraction shorthands.
pub fn ef_tensors(field: &HVectorField, frame: &TensorFrame) -> Result<HVectorData> {
    let met = &frame.met;
    let n = met.n;
    let sub = JetSpace::new(n, 1, n, 3)?;
    let b_jets = field.b_jets(&met.l_jet, &sub, &met.point.x)?;
    let b = t1(n, |i| b_jets[i].value());
    let beta = dot(&b, &met.point.y);
    if beta.abs() < 1e-12 {
        return Err(HmxError::ChangeDomain(format!(
            "β = {beta:.3e}: change undefined at x={:?}, y={:?}",
            met.point.x, met.point.y
        )));
    }
    let tau = met.big_l / beta;
    if (tau - 1.0).abs() < TAU_POLE_GUARD {
        return Err(HmxError::ChangeDomain(format!(
            "τ = {tau:.8} at the pole of the change (x={:?}, y={:?})",
            met.point.x, met.point.y
        )));
    }
    let m = t1(n, |i| b[i] - met.l[i] / tau);
    let m_up = met.g_inv.mul_vec(&m);
    let m2 = dot(&m, &m_up);

    let b_cov = frame.h_cov_deriv(&b_jets);
    let e = t2(n, |i, j| 0.5 * (b_cov.get(i, j) + b_cov.get(j, i)));
    let f = t2(n, |i, j| 0.5 * (b_cov.get(i, j) - b_cov.get(j, i)));

    let mut data = HVectorData {
        rho0: field.rho0,
        b,
        beta,
        tau,
        m,
        m2,
        b_cov,
        e,
        f,
        beta_j: vec![0.0; n],
        rho_k: vec![0.0; n],
        e00: 0.0,
        ej0: vec![0.0; n],
        fj0: vec![0.0; n],
        f_up0: vec![0.0; n],
        f_beta0: 0.0,
    };
    data.recontract(&met.g_inv, &met.point.y);
    Ok(data)
}

/// Residuals of the defining conditions at one frame.
#[derive(Debug, Clone, Copy)]
pub struct HVectorResiduals {
    /// `‖L ∂̇_j b_i − ρ₀ h_ij‖∞` (holds by construction for weak fields)
    pub eq2: f64,
    /// `‖L C^h_ij b_h − ρ₀ h_ij‖∞` (the full h-vector condition)
    pub cond_ii: f64,
    /// `‖F_ij‖∞` (gradient diagnostic)
    pub gradient: f64,
}

pub fn h_vector_residuals(
    field: &HVectorField,
    frame: &TensorFrame,
    data: &HVectorData,
) -> Result<HVectorResiduals> {
    let met = &frame.met;
    let n = met.n;
    let sub = JetSpace::new(n, 1, n, 3)?;
    let b_jets = field.b_jets(&met.l_jet, &sub, &met.point.x)?;
    let eq2 = t2(n, |i, j| {
        met.big_l * b_jets[i].dy(j) - field.rho0 * met.h.get(i, j)
    })
    .max_abs();
    let cond_ii = cond_ii_residual(&met.cartan_mixed, &data.b, met.big_l, field.rho0, &met.h);
    Ok(HVectorResiduals {
        eq2,
        cond_ii,
        gradient: data.f.max_abs(),
    })
}

/// `‖L C^h_ij b_h − ρ h_ij‖∞` from raw tensors.
pub fn cond_ii_residual(cartan_mixed: &Ten3, b: &[f64], big_l: f64, rho: f64, h: &Ten2) -> f64 {
    let n = h.n;
    t2(n, |i, j| {
        big_l
            * (0..n)
                .map(|r| cartan_mixed.get(r, i, j) * b[r])
                .sum::<f64>()
            - rho * h.get(i, j)
    })
    .max_abs()
}

/// One sample for the existence search: the tensors entering the condition
/// `L C^h_ij c_h(x) = ρ₀ h_ij` at a point-direction.
#[derive(Debug, Clone)]
pub struct SearchSample {
    pub x: Vec<f64>,
    pub big_l: f64,
    pub h: Ten2,
    pub cartan_mixed: Ten3,
}

impl SearchSample {
    pub fn from_space(space: &FinslerSpace, p: &PointDirection) -> Result<SearchSample> {
        let met = space.metric_tensors(p)?;
        Ok(SearchSample {
            x: p.x.clone(),
            big_l: met.big_l,
            h: met.h,
            cartan_mixed: met.cartan_mixed,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub best_rho0: f64,
    pub best_field: HVectorField,
    /// RMS residual of the condition at the best grid point.
    pub best_residual: f64,
    /// `(ρ₀, rms residual)` along the scanned grid.
    pub residual_curve: Vec<(f64, f64)>,
    pub samples: usize,
}

/// Least-squares existence probe for the full h-vector condition.
///
/// For each `ρ₀` on the grid the ansatz `b = ρ₀ l + c(x)` (polynomial `c` of
/// the given degree) turns the condition residual into a linear least-squares
/// problem in the `c` coefficients, because `C·l = 0`.  The probe reports the
/// best residual; it never claims existence.
pub fn search_h_vector(
    samples: &[SearchSample],
    degree: u32,
    rho0_grid: &[f64],
) -> Result<SearchOutcome> {
    if samples.len() < 10 {
        return Err(HmxError::config(format!(
            "existence search needs at least 10 sample points, got {}",
            samples.len()
        )));
    }
    if degree > 2 {
        return Err(HmxError::config("search ansatz degree is limited to 2"));
    }
    if rho0_grid.is_empty() || rho0_grid.iter().any(|r| r.abs() < 1e-6) {
        return Err(HmxError::config(
            "ρ₀ grid must be nonempty and bounded away from 0",
        ));
    }
    let n = samples[0].x.len();
    let monomials = monomials_up_to(n, degree);
    let cols = n * monomials.len();

    let mut a_rows: Vec<Vec<f64>> = Vec::new();
    let mut h_flat: Vec<f64> = Vec::new();
    for s in samples {
        for i in 0..n {
            for j in 0..n {
                let mut row = vec![0.0; cols];
                for hidx in 0..n {
                    let coef = s.big_l * s.cartan_mixed.get(hidx, i, j);
                    for (mi, mono) in monomials.iter().enumerate() {
                        row[hidx * monomials.len() + mi] = coef * mono_eval(mono, &s.x);
                    }
                }
                a_rows.push(row);
                h_flat.push(s.h.get(i, j));
            }
        }
    }

    let mut curve = Vec::with_capacity(rho0_grid.len());
    let mut best: Option<(f64, Vec<f64>, f64)> = None;
    for &rho0 in rho0_grid {
        let rhs: Vec<f64> = h_flat.iter().map(|h| rho0 * h).collect();
        let theta = linalg::lstsq(&a_rows, &rhs)?;
        let mut ss = 0.0;
        for (row, want) in a_rows.iter().zip(&rhs) {
            let got: f64 = row.iter().zip(&theta).map(|(a, t)| a * t).sum();
            ss += (got - want) * (got - want);
        }
        let rms = (ss / a_rows.len() as f64).sqrt();
        curve.push((rho0, rms));
        if best.as_ref().is_none_or(|(_, _, b)| rms < *b) {
            best = Some((rho0, theta, rms));
        }
    }
    let (best_rho0, theta, best_residual) = best.unwrap();
    let c: Vec<Poly> = (0..n)
        .map(|i| {
            let mut poly = Poly::zero();
            for (mi, mono) in monomials.iter().enumerate() {
                let coeff = theta[i * monomials.len() + mi];
                if coeff != 0.0 {
                    poly = poly.plus(Poly::term(mono.clone(), coeff));
                }
            }
            poly
        })
        .collect();
    Ok(SearchOutcome {
        best_rho0,
        best_field: HVectorField {
            rho0: best_rho0,
            c,
            mode: HVectorMode::Searched,
        },
        best_residual,
        residual_curve: curve,
        samples: samples.len(),
    })
}

fn monomials_up_to(n: usize, degree: u32) -> Vec<Vec<u32>> {
    let mut out: Vec<Vec<u32>> = Vec::new();
    let mut cur = vec![0u32; n];
    fn rec(out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>, pos: usize, left: u32) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur[pos] = v;
            rec(out, cur, pos + 1, left - v);
        }
        cur[pos] = 0;
    }
    rec(&mut out, &mut cur, 0, degree);
    out.sort_by_key(|m| (m.iter().sum::<u32>(), m.clone()));
    out
}

fn mono_eval(mono: &[u32], x: &[f64]) -> f64 {
    mono.iter()
        .enumerate()
        .map(|(i, &p)| x[i].powi(p as i32))
        .product()
}
