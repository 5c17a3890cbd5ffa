//! Finsler spaces and their tensor frames.
//!
//! A space is a fundamental function `L(x, y)`, positively 1-homogeneous in
//! `y`, described by one of the built-in metric families.  At a
//! point-direction the engine extracts every metric-level tensor from the jet
//! of `L²` and assembles the spray, the nonlinear connection, the Berwald
//! coefficients and the Cartan horizontal coefficients from the same jet.
//!
//! The transformed space of the h-Matsumoto change is itself a family, so the
//! whole frame machinery (including connections) applies to it unchanged —
//! that is the direct differentiation route the closed forms are checked
//! against.

use std::sync::Arc;

use crate::error::{HmxError, Result};
use crate::expr::Poly;
use crate::hvector::HVectorField;
use crate::jets::{Jet, JetSpace};
use crate::linalg;
use crate::point::PointDirection;
use crate::tensor::{dot, max_abs_vec, t1, t2, t3, Ten1, Ten2, Ten3};

/// Computations refuse the change this close to its pole `τ = 1`.
pub const TAU_POLE_GUARD: f64 = 1e-6;

/// Built-in metric families; coefficient functions are exact polynomials in x.
#[derive(Debug, Clone)]
pub enum MetricFamily {
    /// `L = ‖y‖` (flat Euclidean).
    Euclidean,
    /// `L² = Σ a_i(x) (y^i)²`.
    RiemannDiag(Vec<Poly>),
    /// `L² = a_ij(x) y^i y^j` with symmetric `a`.
    Riemann(Vec<Vec<Poly>>),
    /// `L = √(a_ij(x) y^i y^j) + c_i(x) y^i`.
    Randers { a: Vec<Vec<Poly>>, c: Vec<Poly> },
    /// `L̄ = L²/(L − β)` over a base space, with `β = b_i y^i` from a weak
    /// h-vector field.
    Transformed {
        base: Box<MetricFamily>,
        hv: HVectorField,
    },
}

#[derive(Debug, Clone)]
pub struct FinslerSpace {
    pub dim: usize,
    pub family: MetricFamily,
}

impl FinslerSpace {
    pub fn new(dim: usize, family: MetricFamily) -> Result<FinslerSpace> {
        if dim < 2 {
            return Err(HmxError::config("dimension must be at least 2"));
        }
        Ok(FinslerSpace { dim, family })
    }

    pub fn euclidean(dim: usize) -> FinslerSpace {
        FinslerSpace {
            dim,
            family: MetricFamily::Euclidean,
        }
    }

    /// The canonical Randers instance used throughout the test corpus:
    /// `a = δ`, constant one-form `(0.1, 0, …)`.
    pub fn randers_flat(dim: usize) -> FinslerSpace {
        let a = identity_coeffs(dim);
        let mut c = vec![Poly::zero(); dim];
        c[0] = Poly::constant(0.1);
        FinslerSpace {
            dim,
            family: MetricFamily::Randers { a, c },
        }
    }

    /// The h-Matsumoto transform of this space by the given field.
    pub fn transformed(&self, hv: &HVectorField) -> FinslerSpace {
        FinslerSpace {
            dim: self.dim,
            family: MetricFamily::Transformed {
                base: Box::new(self.family.clone()),
                hv: hv.clone(),
            },
        }
    }

    /// Jet of `L` at the point-direction, with the requested y-cap.
    pub fn l_jet(&self, p: &PointDirection, xcap: u32, ycap: u32) -> Result<Jet> {
        let space = JetSpace::new(self.dim, xcap, self.dim, ycap)?;
        self.family_l_jet(&self.family, p, &space)
    }

    /// Scalar value `L(x, y)`; for transformed families this silently builds
    /// the first-order jet that `β = b_i y^i` requires.
    pub fn l_value(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let p = PointDirection {
            x: x.to_vec(),
            y: y.to_vec(),
        };
        Ok(self.l_jet(&p, 0, 0)?.value())
    }

    fn family_l_jet(
        &self,
        fam: &MetricFamily,
        p: &PointDirection,
        space: &Arc<JetSpace>,
    ) -> Result<Jet> {
        let n = self.dim;
        let yj: Vec<Jet> = (0..n).map(|i| Jet::var_y(space, i, p.y[i])).collect();
        match fam {
            MetricFamily::Euclidean => {
                let mut s = Jet::constant(space, 0.0);
                for j in &yj {
                    s = s.add(&j.mul(j));
                }
                s.sqrt()
            }
            MetricFamily::RiemannDiag(coeffs) => {
                if coeffs.len() != n {
                    return Err(HmxError::config("diagonal metric needs n coefficients"));
                }
                let mut s = Jet::constant(space, 0.0);
                for (i, c) in coeffs.iter().enumerate() {
                    s = s.add(&c.eval_jet(space, &p.x).mul(&yj[i]).mul(&yj[i]));
                }
                s.sqrt()
            }
            MetricFamily::Riemann(a) => quadratic_jet(a, p, space, &yj, n)?.sqrt(),
            MetricFamily::Randers { a, c } => {
                if c.len() != n {
                    return Err(HmxError::config("Randers one-form needs n components"));
                }
                let alpha = quadratic_jet(a, p, space, &yj, n)?.sqrt()?;
                let mut beta = Jet::constant(space, 0.0);
                for (i, ci) in c.iter().enumerate() {
                    beta = beta.add(&ci.eval_jet(space, &p.x).mul(&yj[i]));
                }
                Ok(alpha.add(&beta))
            }
            MetricFamily::Transformed { base, hv } => {
                let hi_space = JetSpace::new(space.nx, space.xcap, space.ny, space.ycap + 1)?;
                let base_l = self.family_l_jet(base, p, &hi_space)?;
                let b = hv.b_jets(&base_l, space, &p.x)?;
                let mut beta = Jet::constant(space, 0.0);
                for (i, bi) in b.iter().enumerate() {
                    beta = beta.add(&bi.mul(&yj[i]));
                }
                let l = base_l.restrict(space)?;
                let lv = l.value();
                let bv = beta.value();
                if bv.abs() < 1e-12 {
                    return Err(HmxError::ChangeDomain(format!(
                        "β = {bv:.3e} at x={:?}, y={:?}: τ = L/β undefined",
                        p.x, p.y
                    )));
                }
                let tau = lv / bv;
                if (tau - 1.0).abs() < TAU_POLE_GUARD {
                    return Err(HmxError::ChangeDomain(format!(
                        "τ = {tau:.8} within {TAU_POLE_GUARD:.0e} of the pole at x={:?}, y={:?}",
                        p.x, p.y
                    )));
                }
                l.mul(&l).div(&l.sub(&beta))
            }
        }
    }

    /// Metric-level tensors at a point-direction.
    pub fn metric_tensors(&self, p: &PointDirection) -> Result<MetricTensors> {
        let l_jet = self.l_jet(p, 1, 4)?;
        MetricTensors::from_l_jet(self.dim, p.clone(), l_jet)
    }

    /// Full frame: metric tensors plus spray and connections.
    pub fn frame(&self, p: &PointDirection) -> Result<TensorFrame> {
        let met = self.metric_tensors(p)?;
        let con = ConnectionTensors::from_metric(&met);
        Ok(TensorFrame { met, con })
    }
}

fn identity_coeffs(n: usize) -> Vec<Vec<Poly>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Poly::constant(1.0)
                    } else {
                        Poly::zero()
                    }
                })
                .collect()
        })
        .collect()
}

fn quadratic_jet(
    a: &[Vec<Poly>],
    p: &PointDirection,
    space: &Arc<JetSpace>,
    yj: &[Jet],
    n: usize,
) -> Result<Jet> {
    if a.len() != n || a.iter().any(|row| row.len() != n) {
        return Err(HmxError::config("metric coefficient matrix must be n × n"));
    }
    let mut s = Jet::constant(space, 0.0);
    for i in 0..n {
        for j in 0..n {
            if a[i][j].is_zero() {
                continue;
            }
            s = s.add(&a[i][j].eval_jet(space, &p.x).mul(&yj[i]).mul(&yj[j]));
        }
    }
    Ok(s)
}

/// Metric-level tensors: `L`, `l_i`, `h_ij`, `g_ij`, `g^ij`, `C_ijk`,
/// `C^i_jk`, plus the jets of `L` and `L²` they came from.
#[derive(Debug, Clone)]
pub struct MetricTensors {
    pub n: usize,
    pub point: PointDirection,
    pub big_l: f64,
    pub l: Ten1,
    pub h: Ten2,
    pub g: Ten2,
    pub g_inv: Ten2,
    pub cartan: Ten3,
    pub cartan_mixed: Ten3,
    pub l_jet: Jet,
    pub l2_jet: Jet,
}

impl MetricTensors {
    pub fn from_l_jet(n: usize, point: PointDirection, l_jet: Jet) -> Result<MetricTensors> {
        let l2_jet = l_jet.mul(&l_jet);
        let lsq = l2_jet.value();
        if lsq <= 0.0 {
            return Err(HmxError::Degenerate(format!("L² = {lsq:.3e} not positive")));
        }
        let big_l = lsq.sqrt();
        let l = t1(n, |i| l2_jet.dy(i) / (2.0 * big_l));
        let g = t2(n, |i, j| 0.5 * l2_jet.dyy(i, j));
        linalg::cholesky_check(&g).map_err(|e| {
            HmxError::Degenerate(format!("metric tensor not positive definite: {e}"))
        })?;
        let g_inv = linalg::invert(&g)?;
        let h = t2(n, |i, j| g.get(i, j) - l[i] * l[j]);
        let cartan = t3(n, |i, j, k| 0.25 * l2_jet.dyyy(i, j, k));
        let cartan_mixed = t3(n, |i, j, k| {
            (0..n).map(|r| g_inv.get(i, r) * cartan.get(r, j, k)).sum()
        });
        Ok(MetricTensors {
            n,
            point,
            big_l,
            l,
            h,
            g,
            g_inv,
            cartan,
            cartan_mixed,
            l_jet,
            l2_jet,
        })
    }
}

/// Spray and connection coefficients derived from the metric jet.
#[derive(Debug, Clone)]
pub struct ConnectionTensors {
    /// Spray coefficients `G^i`.
    pub spray: Ten1,
    /// Nonlinear connection `G^i_j = ∂̇_j G^i`.
    pub nonlinear: Ten2,
    /// Berwald coefficients `G^i_jk = ∂̇_k G^i_j`.
    pub berwald: Ten3,
    /// Cartan horizontal coefficients `F^i_jk`.
    pub cartan_h: Ten3,
    /// (v)hv-torsion `P^i_jk = G^i_jk − F^i_jk`.
    pub hv_torsion: Ten3,
}

impl ConnectionTensors {
    pub fn from_metric(met: &MetricTensors) -> ConnectionTensors {
        let n = met.n;
        let l2 = &met.l2_jet;
        let y = &met.point.y;
        let ginv = &met.g_inv;

        // A_l = y^m ∂_m ∂̇_l L² − ∂_l L² and its ∂̇-derivatives
        let a_vec = t1(n, |l| {
            (0..n).map(|m| y[m] * l2.dx_dy(m, l)).sum::<f64>() - l2.dx(l)
        });
        let da = t2(n, |l, k| {
            l2.dx_dy(k, l) - l2.dx_dy(l, k) + (0..n).map(|m| y[m] * l2.dx_dyy(m, l, k)).sum::<f64>()
        });
        let dda = t3(n, |l, j, k| {
            l2.dx_dyy(k, l, j) - l2.dx_dyy(l, k, j)
                + l2.dx_dyy(j, l, k)
                + (0..n).map(|m| y[m] * l2.dx_dyyy(m, l, k, j)).sum::<f64>()
        });

        // ∂̇ of the inverse metric via ∂̇ g = 2C
        let dginv = t3(n, |i, l, j| {
            -2.0 * (0..n)
                .map(|a| {
                    (0..n)
                        .map(|b| ginv.get(i, a) * ginv.get(l, b) * met.cartan.get(a, b, j))
                        .sum::<f64>()
                })
                .sum::<f64>()
        });
        // ∂̇_k ∂̇_j g^{il}
        let ddginv = |i: usize, l: usize, j: usize, k: usize| -> f64 {
            let mut s = 0.0;
            for a in 0..n {
                for b in 0..n {
                    s += dginv.get(i, a, k) * ginv.get(l, b) * met.cartan.get(a, b, j)
                        + ginv.get(i, a) * dginv.get(l, b, k) * met.cartan.get(a, b, j)
                        + ginv.get(i, a) * ginv.get(l, b) * 0.25 * l2.dyyyy(a, b, j, k);
                }
            }
            -2.0 * s
        };

        let spray = t1(n, |i| {
            0.25 * (0..n).map(|l| ginv.get(i, l) * a_vec[l]).sum::<f64>()
        });
        let nonlinear = t2(n, |i, j| {
            0.25 * (0..n)
                .map(|l| dginv.get(i, l, j) * a_vec[l] + ginv.get(i, l) * da.get(l, j))
                .sum::<f64>()
        });
        let berwald = t3(n, |i, j, k| {
            0.25 * (0..n)
                .map(|l| {
                    ddginv(i, l, j, k) * a_vec[l]
                        + dginv.get(i, l, j) * da.get(l, k)
                        + dginv.get(i, l, k) * da.get(l, j)
                        + ginv.get(i, l) * dda.get(l, j, k)
                })
                .sum::<f64>()
        });

        // δ_k g_ij = ∂_k g_ij − 2 C_ijr G^r_k
        let delta_g = t3(n, |i, j, k| {
            0.5 * l2.dx_dyy(k, i, j)
                - 2.0
                    * (0..n)
                        .map(|r| met.cartan.get(i, j, r) * nonlinear.get(r, k))
                        .sum::<f64>()
        });
        let cartan_h = t3(n, |i, j, k| {
            0.5 * (0..n)
                .map(|hh| {
                    ginv.get(i, hh)
                        * (delta_g.get(hh, k, j) + delta_g.get(j, hh, k) - delta_g.get(j, k, hh))
                })
                .sum::<f64>()
        });
        let hv_torsion = t3(n, |i, j, k| berwald.get(i, j, k) - cartan_h.get(i, j, k));

        ConnectionTensors {
            spray,
            nonlinear,
            berwald,
            cartan_h,
            hv_torsion,
        }
    }
}

/// Everything the engine knows about one space at one point-direction.
#[derive(Debug, Clone)]
pub struct TensorFrame {
    pub met: MetricTensors,
    pub con: ConnectionTensors,
}

impl TensorFrame {
    pub fn n(&self) -> usize {
        self.met.n
    }

    /// Horizontal covariant derivative of a covector field given as jets:
    /// `X_{i|j} = δ_j X_i − X_r F^r_ij`.
    pub fn h_cov_deriv(&self, x_jets: &[Jet]) -> Ten2 {
        let n = self.met.n;
        t2(n, |i, j| {
            let delta = x_jets[i].dx(j)
                - (0..n)
                    .map(|r| self.con.nonlinear.get(r, j) * x_jets[i].dy(r))
                    .sum::<f64>();
            delta
                - (0..n)
                    .map(|r| x_jets[r].value() * self.con.cartan_h.get(r, i, j))
                    .sum::<f64>()
        })
    }

    /// Vertical covariant derivative (unscaled convention):
    /// `X_i|_j = ∂̇_j X_i − X_r C^r_ij`.
    pub fn v_cov_deriv(&self, x_jets: &[Jet]) -> Ten2 {
        let n = self.met.n;
        t2(n, |i, j| {
            x_jets[i].dy(j)
                - (0..n)
                    .map(|r| x_jets[r].value() * self.met.cartan_mixed.get(r, i, j))
                    .sum::<f64>()
        })
    }
}

/// Residuals of the structural identities every frame must satisfy.
#[derive(Debug, Clone)]
pub struct HomogeneityReport {
    /// `|l_i y^i − L|`
    pub ly_minus_l: f64,
    /// `‖h_ij y^j‖∞`
    pub hy: f64,
    /// `‖C_ijk y^k‖∞`
    pub cy: f64,
    /// `|g_ij y^i y^j − L²|`
    pub gyy_minus_l2: f64,
    /// `‖g_{ij|k}‖∞` (h-metricity)
    pub metricity: f64,
    /// `‖F^i_jk y^j − G^i_k‖∞` (deflection)
    pub deflection: f64,
    /// `max(‖P^i_jk y^k‖∞, ‖P^i_jk y^j‖∞)`
    pub torsion_y: f64,
    /// `max_λ |L(x, λy) − λ L(x, y)| / (λL)` over λ ∈ {0.5, 2, 3}
    pub l_homogeneity: f64,
    /// `‖g(x, λy) − g(x, y)‖∞` (degree-0 homogeneity of the metric)
    pub g_homogeneity: f64,
    /// `‖λ C(x, λy) − C(x, y)‖∞` (degree −1 homogeneity of the Cartan tensor)
    pub c_homogeneity: f64,
}

impl HomogeneityReport {
    pub fn max_residual(&self) -> f64 {
        [
            self.ly_minus_l,
            self.hy,
            self.cy,
            self.gyy_minus_l2,
            self.metricity,
            self.deflection,
            self.torsion_y,
            self.l_homogeneity,
            self.g_homogeneity,
            self.c_homogeneity,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Runs the structural identity suite at one point-direction.
pub fn homogeneity_suite(space: &FinslerSpace, p: &PointDirection) -> Result<HomogeneityReport> {
    let frame = space.frame(p)?;
    let met = &frame.met;
    let con = &frame.con;
    let n = met.n;
    let y = &p.y;

    let ly_minus_l = (dot(&met.l, y) - met.big_l).abs();
    let hy = max_abs_vec(&met.h.mul_vec(y));
    let cy = met.cartan.dot_last(y).max_abs();
    let gyy_minus_l2 = (met.g.bilinear(y, y) - met.big_l * met.big_l).abs();

    // g_{ij|k} = δ_k g_ij − g_rj F^r_ik − g_ir F^r_jk
    let l2 = &met.l2_jet;
    let metricity = t3(n, |i, j, k| {
        let delta = 0.5 * l2.dx_dyy(k, i, j)
            - 2.0
                * (0..n)
                    .map(|r| met.cartan.get(i, j, r) * con.nonlinear.get(r, k))
                    .sum::<f64>();
        delta
            - (0..n)
                .map(|r| {
                    met.g.get(r, j) * con.cartan_h.get(r, i, k)
                        + met.g.get(i, r) * con.cartan_h.get(r, j, k)
                })
                .sum::<f64>()
    })
    .max_abs();

    let deflection = t2(n, |i, k| {
        (0..n)
            .map(|j| con.cartan_h.get(i, j, k) * y[j])
            .sum::<f64>()
            - con.nonlinear.get(i, k)
    })
    .max_abs();

    let torsion_y = con.hv_torsion.dot_last(y).max_abs().max(
        t2(n, |i, k| {
            (0..n).map(|j| con.hv_torsion.get(i, j, k) * y[j]).sum()
        })
        .max_abs(),
    );

    let mut l_homogeneity: f64 = 0.0;
    let mut g_homogeneity: f64 = 0.0;
    let mut c_homogeneity: f64 = 0.0;
    for lambda in [0.5, 2.0, 3.0] {
        let ps = p.rescaled(lambda);
        let scaled = space.metric_tensors(&ps)?;
        l_homogeneity =
            l_homogeneity.max((scaled.big_l - lambda * met.big_l).abs() / (lambda * met.big_l));
        g_homogeneity = g_homogeneity.max(scaled.g.sub(&met.g).max_abs());
        let mut cmax: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    cmax = cmax
                        .max((lambda * scaled.cartan.get(i, j, k) - met.cartan.get(i, j, k)).abs());
                }
            }
        }
        c_homogeneity = c_homogeneity.max(cmax);
    }

    Ok(HomogeneityReport {
        ly_minus_l,
        hy,
        cy,
        gyy_minus_l2,
        metricity,
        deflection,
        torsion_y,
        l_homogeneity,
        g_homogeneity,
        c_homogeneity,
    })
}
