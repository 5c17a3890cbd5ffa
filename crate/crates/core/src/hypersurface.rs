//! Parametrized hypersurfaces in the base and transformed spaces.
//!
//! Charts are expression trees in the Gaussian coordinates `u`, so the
//! projection factors `B^i_α` and their derivatives `B^i_αβ` come from exact
//! jets.  The unit normal solves the `g`-orthogonality system and is fixed by
//! a sign convention (last-axis component non-negative, ties broken by the
//! first nonzero component).  Relative-derivative checks rebuild the left
//! sides from finite differences of the chart data, which keeps them
//! independent of the closed-form right sides.

use std::sync::Arc;

use crate::error::{HmxError, Result};
use crate::expr::Expr;
use crate::hmatsumoto::{BarredFrame, DiffTensors, ScalarPack};
use crate::hvector::HVectorData;
use crate::jets::{Jet, JetSpace};
use crate::linalg;
use crate::point::PointDirection;
use crate::space::{FinslerSpace, TensorFrame};
use crate::tensor::{dot, max_abs_vec, sub_vec, t1, t2, Ten1, Ten2, Ten3};

/// Default tolerance for the hyperplane classification predicates.
pub const EPS_CLS: f64 = 1e-8;

/// A hypersurface `x^i = x^i(u^α)` given by `n` expressions in `n−1`
/// Gaussian coordinates.
#[derive(Debug, Clone)]
pub struct Chart {
    pub dim: usize,
    pub exprs: Vec<Expr>,
}

impl Chart {
    pub fn new(dim: usize, exprs: Vec<Expr>) -> Result<Chart> {
        if exprs.len() != dim {
            return Err(HmxError::config(format!(
                "chart needs {dim} coordinate expressions, got {}",
                exprs.len()
            )));
        }
        Ok(Chart { dim, exprs })
    }

    /// Coordinate hyperplane `x^axis = offset`, the other coordinates being
    /// the Gaussian coordinates in order.
    pub fn hyperplane(dim: usize, axis: usize, offset: f64) -> Result<Chart> {
        if axis >= dim {
            return Err(HmxError::config("hyperplane axis out of range"));
        }
        let mut exprs = Vec::with_capacity(dim);
        let mut next_u = 0usize;
        for i in 0..dim {
            if i == axis {
                exprs.push(Expr::c(offset));
            } else {
                exprs.push(Expr::var(next_u));
                next_u += 1;
            }
        }
        Chart::new(dim, exprs)
    }

    /// Round sphere of the given radius and center (angular chart).
    pub fn sphere(dim: usize, radius: f64, center: &[f64]) -> Result<Chart> {
        if center.len() != dim {
            return Err(HmxError::config("sphere center dimension mismatch"));
        }
        if radius <= 0.0 {
            return Err(HmxError::config("sphere radius must be positive"));
        }
        let shift = |e: Expr, i: usize| e.scale(radius).add(Expr::c(center[i]));
        let exprs: Vec<Expr> = match dim {
            2 => vec![shift(Expr::var(0).cos(), 0), shift(Expr::var(0).sin(), 1)],
            3 => vec![
                shift(Expr::var(0).sin().mul(Expr::var(1).cos()), 0),
                shift(Expr::var(0).sin().mul(Expr::var(1).sin()), 1),
                shift(Expr::var(0).cos(), 2),
            ],
            _ => {
                // polar recursion: x^k = r cos u^k Π_{j<k} sin u^j, last = r Π sin
                let mut exprs = Vec::with_capacity(dim);
                for k in 0..dim {
                    let mut e = if k < dim - 1 {
                        Expr::var(k).cos()
                    } else {
                        Expr::c(1.0)
                    };
                    for j in 0..k.min(dim - 1) {
                        e = e.mul(Expr::var(j).sin());
                    }
                    exprs.push(shift(e, k));
                }
                exprs
            }
        };
        Chart::new(dim, exprs)
    }

    /// Graph hypersurface `x = (u, f(u))`.
    pub fn graph(dim: usize, f: Expr) -> Result<Chart> {
        let mut exprs: Vec<Expr> = (0..dim - 1).map(Expr::var).collect();
        exprs.push(f);
        Chart::new(dim, exprs)
    }

    /// Position and first/second chart derivatives at `u`.
    pub fn eval(&self, u: &[f64]) -> Result<ChartData> {
        let d = self.dim - 1;
        if u.len() != d {
            return Err(HmxError::config(format!(
                "chart expects {d} Gaussian coordinates, got {}",
                u.len()
            )));
        }
        let sp: Arc<JetSpace> = JetSpace::new(0, 0, d, 2)?;
        let mut x = vec![0.0; self.dim];
        let mut b_t = vec![vec![0.0; self.dim]; d];
        let mut b_tt = vec![vec![vec![0.0; self.dim]; d]; d];
        for (i, e) in self.exprs.iter().enumerate() {
            let j = e.eval_jet(&sp, &|k| Jet::var_y(&sp, k, u[k]))?;
            x[i] = j.value();
            for a in 0..d {
                b_t[a][i] = j.dy(a);
                for b in 0..d {
                    b_tt[a][b][i] = j.dyy(a, b);
                }
            }
        }
        Ok(ChartData { x, b_t, b_tt })
    }
}

/// Chart derivatives at one `u`: `x`, `B^i_α`, `B^i_αβ`.
#[derive(Debug, Clone)]
pub struct ChartData {
    pub x: Vec<f64>,
    /// `b_t[α][i] = B^i_α`
    pub b_t: Vec<Ten1>,
    /// `b_tt[α][β][i] = B^i_αβ`
    pub b_tt: Vec<Vec<Ten1>>,
}

/// Full hypersurface frame at `(u, v)`: chart data, the ambient frame at
/// `(x(u), B v)`, induced metric, unit normal and inverse projections.
#[derive(Debug, Clone)]
pub struct ChartFrame {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub data: ChartData,
    pub point: PointDirection,
    pub frame: TensorFrame,
    /// induced metric `g_αβ` and its inverse
    pub g_ind: Ten2,
    pub g_ind_inv: Ten2,
    /// `B^i` (g-unit normal, sign convention applied)
    pub normal_up: Ten1,
    /// `B_i = g_ij B^j`
    pub normal_low: Ten1,
    /// `inv_proj[α][i] = B^α_i = g^{αβ} g_ij B^j_β`
    pub inv_proj: Vec<Ten1>,
}

/// Applies the normal sign convention in place: last-axis component
/// non-negative, ties broken by the first component exceeding the tolerance.
fn fix_normal_sign(k: &mut [f64]) {
    let n = k.len();
    let scale = max_abs_vec(k).max(1e-300);
    let tol = 1e-10 * scale;
    let lead = if k[n - 1].abs() > tol {
        k[n - 1]
    } else {
        *k.iter().find(|c| c.abs() > tol).unwrap_or(&k[n - 1])
    };
    if lead < 0.0 {
        for c in k.iter_mut() {
            *c = -*c;
        }
    }
}

/// Builds the hypersurface frame at `(u, v)`.
pub fn chart_frame(
    space: &FinslerSpace,
    chart: &Chart,
    u: &[f64],
    v: &[f64],
) -> Result<ChartFrame> {
    let n = space.dim;
    let d = n - 1;
    if chart.dim != n {
        return Err(HmxError::config("chart dimension does not match the space"));
    }
    if v.len() != d {
        return Err(HmxError::config(format!(
            "supporting element needs {d} components"
        )));
    }
    let data = chart.eval(u)?;
    let y = t1(n, |i| (0..d).map(|a| data.b_t[a][i] * v[a]).sum());
    let point = PointDirection::new(data.x.clone(), y)?;
    let frame = space.frame(&point)?;
    let g = &frame.met.g;

    let g_ind = t2(d, |a, b| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += g.get(i, j) * data.b_t[a][i] * data.b_t[b][j];
            }
        }
        s
    });
    linalg::cholesky_check(&g_ind)
        .map_err(|e| HmxError::Chart(format!("induced metric degenerate: {e}")))?;
    let g_ind_inv = linalg::invert(&g_ind)?;

    // normal: kernel of the (n-1) × n system g_ij B^j_α B^i = 0
    let rows: Vec<Vec<f64>> = (0..d)
        .map(|a| t1(n, |i| (0..n).map(|j| g.get(i, j) * data.b_t[a][j]).sum()))
        .collect();
    let mut k = linalg::kernel_vector(&rows, n)?;
    let norm = g.bilinear(&k, &k);
    if norm <= 0.0 {
        return Err(HmxError::Chart("normal has non-positive g-norm".into()));
    }
    let s = norm.sqrt();
    for c in k.iter_mut() {
        *c /= s;
    }
    fix_normal_sign(&mut k);
    let normal_low = g.mul_vec(&k);

    let inv_proj: Vec<Ten1> = (0..d)
        .map(|a| {
            t1(n, |i| {
                let mut s = 0.0;
                for b in 0..d {
                    for j in 0..n {
                        s += g_ind_inv.get(a, b) * g.get(i, j) * data.b_t[b][j];
                    }
                }
                s
            })
        })
        .collect();

    Ok(ChartFrame {
        u: u.to_vec(),
        v: v.to_vec(),
        data,
        point,
        frame,
        g_ind,
        g_ind_inv,
        normal_up: k,
        normal_low,
        inv_proj,
    })
}

/// Residuals of the frame identities (orthonormality, duality, completeness,
/// tangency of `y`, and the angular-metric relations).
#[derive(Debug, Clone)]
pub struct FrameResiduals {
    /// `g_ij B^i_α B^j` and `g_ij B^i B^j − 1`
    pub orthonormality: f64,
    /// the four duality relations of the projection pair
    pub duality: f64,
    /// `B^i_α B^α_j + B^i B_j − δ^i_j`
    pub completeness: f64,
    /// `y_j B^j`
    pub y_normal: f64,
    /// `h_ij B^j_α B^i` and `h_ij B^i − B_j`
    pub angular: f64,
}

impl FrameResiduals {
    pub fn max(&self) -> f64 {
        self.orthonormality
            .max(self.duality)
            .max(self.completeness)
            .max(self.y_normal)
            .max(self.angular)
    }
}

pub fn frame_residuals(cf: &ChartFrame) -> FrameResiduals {
    let n = cf.point.dim();
    let d = n - 1;
    let g = &cf.frame.met.g;
    let mut ortho: f64 = (g.bilinear(&cf.normal_up, &cf.normal_up) - 1.0).abs();
    for a in 0..d {
        ortho = ortho.max(g.bilinear(&cf.data.b_t[a], &cf.normal_up).abs());
    }
    let mut duality: f64 = 0.0;
    for a in 0..d {
        for b in 0..d {
            let delta = if a == b { 1.0 } else { 0.0 };
            duality = duality.max((dot(&cf.data.b_t[a], &cf.inv_proj[b]) - delta).abs());
        }
        duality = duality.max(dot(&cf.data.b_t[a], &cf.normal_low).abs());
        duality = duality.max(dot(&cf.normal_up, &cf.inv_proj[a]).abs());
    }
    duality = duality.max((dot(&cf.normal_up, &cf.normal_low) - 1.0).abs());
    let completeness = t2(n, |i, j| {
        let mut s = cf.normal_up[i] * cf.normal_low[j];
        for a in 0..d {
            s += cf.data.b_t[a][i] * cf.inv_proj[a][j];
        }
        s - if i == j { 1.0 } else { 0.0 }
    })
    .max_abs();
    let y_low = g.mul_vec(&cf.point.y);
    let y_normal = dot(&y_low, &cf.normal_up).abs();
    let h = &cf.frame.met.h;
    let mut angular: f64 = max_abs_vec(&sub_vec(&h.mul_vec(&cf.normal_up), &cf.normal_low));
    for a in 0..d {
        angular = angular.max(h.bilinear(&cf.normal_up, &cf.data.b_t[a]).abs());
    }
    FrameResiduals {
        orthonormality: ortho,
        duality,
        completeness,
        y_normal,
        angular,
    }
}

/// Hyperplane kinds in increasing strength.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Kind {
    #[serde(rename = "none")]
    None,
    #[serde(rename = "first")]
    First,
    #[serde(rename = "second")]
    Second,
    #[serde(rename = "third")]
    Third,
}

/// Fundamentals of the hypersurface at `(u, v)` and its classification.
#[derive(Debug, Clone)]
pub struct Fundamentals {
    /// normal curvature vector `H_α`
    pub h_a: Ten1,
    /// `H_0 = H_α v^α`
    pub h0: f64,
    /// second fundamental h-tensor `H_αβ`
    pub h_ab: Ten2,
    /// `M_α`
    pub m_a: Ten1,
    /// second fundamental v-tensor `M_αβ`
    pub m_ab: Ten2,
    pub kind: Kind,
    /// residuals the classification was decided on: `(‖H_α‖, ‖H_αβ‖, ‖M_αβ‖)`
    pub residuals: (f64, f64, f64),
    pub eps_cls: f64,
    /// residuals of the `v`-contraction relations `H_0α = H_α`,
    /// `H_α0 = H_α + M_α H_0`
    pub contraction_residuals: (f64, f64),
}

pub fn fundamentals(cf: &ChartFrame, eps_cls: f64) -> Fundamentals {
    let n = cf.point.dim();
    let d = n - 1;
    let met = &cf.frame.met;
    let con = &cf.frame.con;
    let b = &cf.data.b_t;
    let bn = &cf.normal_up;
    let bl = &cf.normal_low;

    let m_a = t1(d, |a| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    s += met.cartan.get(i, j, k) * b[a][i] * bn[j] * bn[k];
                }
            }
        }
        s
    });
    let m_ab = t2(d, |a, bb| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    s += met.cartan.get(i, j, k) * b[a][j] * b[bb][k] * bn[i];
                }
            }
        }
        s
    });
    // B^i_0α = B^i_βα v^β
    let b0 = |a: usize| -> Ten1 {
        t1(n, |i| {
            (0..d).map(|be| cf.data.b_tt[be][a][i] * cf.v[be]).sum()
        })
    };
    let h_a = t1(d, |a| {
        let b0a = b0(a);
        let mut s = 0.0;
        for i in 0..n {
            let conn: f64 = (0..n).map(|j| con.nonlinear.get(i, j) * b[a][j]).sum();
            s += bl[i] * (b0a[i] + conn);
        }
        s
    });
    let h0 = dot(&h_a, &cf.v);
    let h_ab = t2(d, |a, bb| {
        let mut s = 0.0;
        for i in 0..n {
            let mut inner = cf.data.b_tt[a][bb][i];
            for j in 0..n {
                for k in 0..n {
                    inner += con.cartan_h.get(i, j, k) * b[a][j] * b[bb][k];
                }
            }
            s += bl[i] * inner;
        }
        s + m_a[a] * h_a[bb]
    });

    let r1 = max_abs_vec(&h_a);
    let r2 = h_ab.max_abs();
    let r3 = m_ab.max_abs();
    let kind = if r2 <= eps_cls && r3 <= eps_cls {
        Kind::Third
    } else if r2 <= eps_cls {
        Kind::Second
    } else if r1 <= eps_cls {
        Kind::First
    } else {
        Kind::None
    };

    // H_0α = H_βα v^β = H_α and H_α0 = H_αβ v^β = H_α + M_α H_0
    let mut c1: f64 = 0.0;
    let mut c2: f64 = 0.0;
    for a in 0..d {
        let h0a: f64 = (0..d).map(|be| h_ab.get(be, a) * cf.v[be]).sum();
        c1 = c1.max((h0a - h_a[a]).abs());
        let ha0: f64 = (0..d).map(|be| h_ab.get(a, be) * cf.v[be]).sum();
        c2 = c2.max((ha0 - h_a[a] - m_a[a] * h0).abs());
    }

    Fundamentals {
        h_a,
        h0,
        h_ab,
        m_a,
        m_ab,
        kind,
        residuals: (r1, r2, r3),
        eps_cls,
        contraction_residuals: (c1, c2),
    }
}

/// Residuals of the four relative covariant-derivative relations; left sides
/// assembled from finite differences of the chart data (step `fd_step`).
#[derive(Debug, Clone)]
pub struct RelativeDerivResiduals {
    /// `B^i_{α|β} = H_αβ B^i`
    pub h_tangent: f64,
    /// `B^i_α |_β = M_αβ B^i`
    pub v_tangent: f64,
    /// `B^i_{|β} = −H_αβ B^α_j g^{ij}`
    pub h_normal: f64,
    /// `B^i |_β = −M_αβ B^α_j g^{ij}`
    pub v_normal: f64,
}

impl RelativeDerivResiduals {
    pub fn max(&self) -> f64 {
        self.h_tangent
            .max(self.v_tangent)
            .max(self.h_normal)
            .max(self.v_normal)
    }
}

pub fn relative_derivative_check(
    space: &FinslerSpace,
    chart: &Chart,
    cf: &ChartFrame,
    fund: &Fundamentals,
    fd_step: f64,
) -> Result<RelativeDerivResiduals> {
    let n = cf.point.dim();
    let d = n - 1;
    let met = &cf.frame.met;
    let con = &cf.frame.con;
    let b = &cf.data.b_t;
    let bn = &cf.normal_up;

    // ambient connection contraction Θ^i_{jβ} = F^i_jk B^k_β + C^i_jk B^k H_β
    let theta = |i: usize, j: usize, be: usize| -> f64 {
        let mut s = 0.0;
        for k in 0..n {
            s += con.cartan_h.get(i, j, k) * b[be][k]
                + met.cartan_mixed.get(i, j, k) * bn[k] * fund.h_a[be];
        }
        s
    };
    // T^i_{αβ} = B^i_αβ + Θ^i_{jβ} B^j_α; its tangential projection is the
    // induced horizontal coefficient, its normal component is H_αβ
    let t_full = |a: usize, be: usize| -> Ten1 {
        t1(n, |i| {
            cf.data.b_tt[a][be][i] + (0..n).map(|j| theta(i, j, be) * b[a][j]).sum::<f64>()
        })
    };

    let mut h_tangent: f64 = 0.0;
    for a in 0..d {
        for be in 0..d {
            let t = t_full(a, be);
            // ∂_β B^i_α by central differences of the chart
            let mut up = cf.u.to_vec();
            up[be] += fd_step;
            let mut un = cf.u.to_vec();
            un[be] -= fd_step;
            let dp = chart.eval(&up)?;
            let dn = chart.eval(&un)?;
            for i in 0..n {
                let fd = (dp.b_t[a][i] - dn.b_t[a][i]) / (2.0 * fd_step);
                let conn: f64 = (0..n).map(|j| theta(i, j, be) * b[a][j]).sum();
                let induced: f64 = (0..d)
                    .map(|g_| {
                        let f_gab: f64 = dot(&cf.inv_proj[g_], &t);
                        b[g_][i] * f_gab
                    })
                    .sum();
                let lhs = fd + conn - induced;
                h_tangent = h_tangent.max((lhs - fund.h_ab.get(a, be) * bn[i]).abs());
            }
        }
    }

    let mut v_tangent: f64 = 0.0;
    for a in 0..d {
        for be in 0..d {
            let amb = t1(n, |i| {
                (0..n)
                    .map(|j| {
                        (0..n)
                            .map(|k| met.cartan_mixed.get(i, j, k) * b[a][j] * b[be][k])
                            .sum::<f64>()
                    })
                    .sum()
            });
            for i in 0..n {
                let induced: f64 = (0..d)
                    .map(|g_| b[g_][i] * dot(&cf.inv_proj[g_], &amb))
                    .sum();
                let lhs = amb[i] - induced;
                v_tangent = v_tangent.max((lhs - fund.m_ab.get(a, be) * bn[i]).abs());
            }
        }
    }

    // normal derivatives need ∂B^i/∂u^β and ∂B^i/∂v^γ: rebuild the frame at
    // perturbed inputs (the sign convention is stable under small steps)
    let normal_at =
        |u: &[f64], v: &[f64]| -> Result<Ten1> { Ok(chart_frame(space, chart, u, v)?.normal_up) };
    let mut du_normal = vec![vec![0.0; n]; d];
    let mut dv_normal = vec![vec![0.0; n]; d];
    for be in 0..d {
        let mut up = cf.u.to_vec();
        up[be] += fd_step;
        let mut un = cf.u.to_vec();
        un[be] -= fd_step;
        let np = normal_at(&up, &cf.v)?;
        let nn = normal_at(&un, &cf.v)?;
        for i in 0..n {
            du_normal[be][i] = (np[i] - nn[i]) / (2.0 * fd_step);
        }
        let mut vp = cf.v.to_vec();
        vp[be] += fd_step;
        let mut vn = cf.v.to_vec();
        vn[be] -= fd_step;
        let np = normal_at(&cf.u, &vp)?;
        let nn = normal_at(&cf.u, &vn)?;
        for i in 0..n {
            dv_normal[be][i] = (np[i] - nn[i]) / (2.0 * fd_step);
        }
    }
    // induced nonlinear connection G^γ_β = B^γ_i (B^i_0β + G^i_j B^j_β)
    let g_ind_nl = t2(d, |g_, be| {
        let mut s = 0.0;
        for i in 0..n {
            let b0: f64 = (0..d).map(|al| cf.data.b_tt[al][be][i] * cf.v[al]).sum();
            let conn: f64 = (0..n).map(|j| con.nonlinear.get(i, j) * b[be][j]).sum();
            s += cf.inv_proj[g_][i] * (b0 + conn);
        }
        s
    });

    let mut h_normal: f64 = 0.0;
    let mut v_normal: f64 = 0.0;
    for be in 0..d {
        for i in 0..n {
            let delta_b = du_normal[be][i]
                - (0..d)
                    .map(|g_| g_ind_nl.get(g_, be) * dv_normal[g_][i])
                    .sum::<f64>();
            let conn: f64 = (0..n).map(|j| theta(i, j, be) * bn[j]).sum();
            let lhs = delta_b + conn;
            let rhs: f64 = -(0..d)
                .map(|a| {
                    fund.h_ab.get(a, be)
                        * (0..n)
                            .map(|j| met.g_inv.get(i, j) * cf.inv_proj[a][j])
                            .sum::<f64>()
                })
                .sum::<f64>();
            h_normal = h_normal.max((lhs - rhs).abs());

            let amb_v: f64 = (0..n)
                .map(|j| {
                    (0..n)
                        .map(|k| met.cartan_mixed.get(i, j, k) * bn[j] * b[be][k])
                        .sum::<f64>()
                })
                .sum();
            let lhs_v = dv_normal[be][i] + amb_v;
            let rhs_v: f64 = -(0..d)
                .map(|a| {
                    fund.m_ab.get(a, be)
                        * (0..n)
                            .map(|j| met.g_inv.get(i, j) * cf.inv_proj[a][j])
                            .sum::<f64>()
                })
                .sum::<f64>();
            v_normal = v_normal.max((lhs_v - rhs_v).abs());
        }
    }

    Ok(RelativeDerivResiduals {
        h_tangent,
        v_tangent,
        h_normal,
        v_normal,
    })
}

/// The barred hypersurface frame and the residuals of its defining relations.
#[derive(Debug, Clone)]
pub struct BarredChart {
    /// `|b_j B^j|` and the tangency verdict at tolerance `eps`
    pub tangency_residual: f64,
    pub tangent: bool,
    /// `B̄^i = B^i/√p` (the barred unit normal in the tangent case)
    pub normal_up: Ten1,
    /// `B̄_i = ḡ_ij B̄^j`
    pub normal_low: Ten1,
    /// `‖B̄_i − √p B_i‖∞` (two routes to the barred conormal)
    pub conormal_gap: f64,
    /// `ḡ(B_α, B̄)` and `ḡ(B̄, B̄) − 1`
    pub orthonormality: f64,
    /// duality relations of the barred projection pair
    pub duality: f64,
    /// `|ḡ(B, B) − (p + p₃ (m·B)²)|`
    pub normal_norm_identity: f64,
    /// `‖ḡ_ij B^i_α B^j − Q_i B^i_α (B^j m_j)‖∞` (oblique relation; the
    /// content of the non-tangent case)
    pub oblique_identity: f64,
    /// barred induced metric and inverse projections
    pub g_ind: Ten2,
    pub inv_proj: Vec<Ten1>,
}

pub fn barred_hypersurface(
    cf: &ChartFrame,
    hvd: &HVectorData,
    pack: &ScalarPack,
    barred: &BarredFrame,
    eps: f64,
) -> Result<BarredChart> {
    let n = cf.point.dim();
    let d = n - 1;
    let gb = &barred.g_bar;
    let tangency_residual = dot(&hvd.b, &cf.normal_up).abs();
    let tangent = tangency_residual < eps;
    if pack.p <= 0.0 {
        return Err(HmxError::ChangeDomain(format!(
            "p = {:.6e} not positive: no real barred normal (τ={:.4}, ρ={:.4}, m²={:.4})",
            pack.p, pack.tau, pack.rho, pack.m2
        )));
    }
    let sqrt_p = pack.p.sqrt();
    let normal_up = t1(n, |i| cf.normal_up[i] / sqrt_p);
    let normal_low = gb.mul_vec(&normal_up);
    let base_low = cf.frame.met.g.mul_vec(&cf.normal_up);
    let conormal_gap = max_abs_vec(&t1(n, |i| normal_low[i] - sqrt_p * base_low[i]));

    let mut orthonormality = (gb.bilinear(&normal_up, &normal_up) - 1.0).abs();
    for a in 0..d {
        orthonormality = orthonormality.max(gb.bilinear(&cf.data.b_t[a], &normal_up).abs());
    }

    let m_dot_b = dot(&hvd.m, &cf.normal_up);
    let normal_norm_identity =
        (gb.bilinear(&cf.normal_up, &cf.normal_up) - (pack.p + pack.p3 * m_dot_b * m_dot_b)).abs();

    let mut oblique_identity: f64 = 0.0;
    for a in 0..d {
        let lhs = gb.bilinear(&cf.data.b_t[a], &cf.normal_up);
        let rhs = dot(&pack.q_vec, &cf.data.b_t[a]) * m_dot_b;
        oblique_identity = oblique_identity.max((lhs - rhs).abs());
    }

    let g_ind = t2(d, |a, b| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += gb.get(i, j) * cf.data.b_t[a][i] * cf.data.b_t[b][j];
            }
        }
        s
    });
    let g_ind_inv = linalg::invert(&g_ind)?;
    let inv_proj: Vec<Ten1> = (0..d)
        .map(|a| {
            t1(n, |i| {
                let mut s = 0.0;
                for b in 0..d {
                    for j in 0..n {
                        s += g_ind_inv.get(a, b) * gb.get(i, j) * cf.data.b_t[b][j];
                    }
                }
                s
            })
        })
        .collect();

    let mut duality: f64 = 0.0;
    for a in 0..d {
        for b in 0..d {
            let delta = if a == b { 1.0 } else { 0.0 };
            duality = duality.max((dot(&cf.data.b_t[a], &inv_proj[b]) - delta).abs());
        }
        duality = duality.max(dot(&cf.data.b_t[a], &normal_low).abs());
        duality = duality.max(dot(&normal_up, &inv_proj[a]).abs());
    }
    duality = duality.max((dot(&normal_up, &normal_low) - 1.0).abs());

    Ok(BarredChart {
        tangency_residual,
        tangent,
        normal_up,
        normal_low,
        conormal_gap,
        orthonormality,
        duality,
        normal_norm_identity,
        oblique_identity,
        g_ind,
        inv_proj,
    })
}

/// Barred fundamentals along the hypersurface and the scaling relations they
/// satisfy in the tangent gradient case.
#[derive(Debug, Clone)]
pub struct BarredFundamentals {
    /// `H̄_0 = √p (H_0 + B_i D^i)`
    pub h0_bar: f64,
    /// `|H̄_0 − √p H_0|`
    pub h0_scaling_gap: f64,
    /// `M̄_αβ` via the `C̄` contraction
    pub m_ab_bar: Ten2,
    /// `‖M̄_αβ − √p M_αβ‖∞` (two independent routes)
    pub m_scaling_gap: f64,
    /// `M̄_α`
    pub m_a_bar: Ten1,
    /// `H̄_β = √p (H_β + B_i D^i_j B^j_β)`
    pub h_a_bar: Ten1,
    /// `H̄_αβ` assembled from the transformed connection `F̄ = F + D`
    pub h_ab_bar: Ten2,
    /// residual of the collapsed second-fundamental relation
    /// `H̄_αβ − M̄_α H̄_β = √p (H_αβ − qλ M_αβ) − √p M_α H_β`
    pub second_fundamental_gap: f64,
}

pub fn barred_fundamentals_hs(
    cf: &ChartFrame,
    fund: &Fundamentals,
    hvd: &HVectorData,
    pack: &ScalarPack,
    barred: &BarredFrame,
    diff: &DiffTensors,
    bch: &BarredChart,
) -> BarredFundamentals {
    let n = cf.point.dim();
    let d = n - 1;
    let sqrt_p = pack.p.sqrt();
    let bl = &cf.normal_low;
    let b = &cf.data.b_t;

    let h0_bar = sqrt_p * (fund.h0 + dot(&diff.d1, bl));
    let h0_scaling_gap = (h0_bar - sqrt_p * fund.h0).abs();

    let m_ab_bar = t2(d, |a, be| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    s += barred.c_bar.get(i, j, k) * b[a][j] * b[be][k] * bch.normal_up[i];
                }
            }
        }
        s
    });
    let m_scaling_gap = t2(d, |a, be| {
        m_ab_bar.get(a, be) - sqrt_p * fund.m_ab.get(a, be)
    })
    .max_abs();

    let m_a_bar = t1(d, |a| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    s += barred.c_bar.get(i, j, k) * b[a][i] * bch.normal_up[j] * bch.normal_up[k];
                }
            }
        }
        s
    });
    let h_a_bar = t1(d, |a| {
        let mut s = 0.0;
        for i in 0..n {
            s += bl[i] * (0..n).map(|j| diff.d2.get(i, j) * b[a][j]).sum::<f64>();
        }
        sqrt_p * (fund.h_a[a] + s)
    });
    let h_ab_bar = t2(d, |a, be| {
        let mut s = 0.0;
        for i in 0..n {
            let mut inner = cf.data.b_tt[a][be][i];
            for j in 0..n {
                for k in 0..n {
                    inner += diff.f_bar.get(i, j, k) * b[a][j] * b[be][k];
                }
            }
            s += sqrt_p * bl[i] * inner; // B̄_i = √p B_i
        }
        s + m_a_bar[a] * h_a_bar[be]
    });

    let (lam, _) = pack.lambda_phi(hvd.e00);
    let second_fundamental_gap = t2(d, |a, be| {
        let lhs = h_ab_bar.get(a, be) - m_a_bar[a] * h_a_bar[be];
        let rhs = sqrt_p * (fund.h_ab.get(a, be) - pack.q * lam * fund.m_ab.get(a, be))
            - sqrt_p * fund.m_a[a] * fund.h_a[be];
        lhs - rhs
    })
    .max_abs();

    BarredFundamentals {
        h0_bar,
        h0_scaling_gap,
        m_ab_bar,
        m_scaling_gap,
        m_a_bar,
        h_a_bar,
        h_ab_bar,
        second_fundamental_gap,
    }
}

/// Induced torsion and Berwald coefficients of the hypersurface, their
/// completeness reconstructions, and the barred equality residuals.
#[derive(Debug, Clone)]
pub struct InducedConnections {
    /// `P^α_βγ = B^α_i K^i_βγ`, `K^i_βγ = P^i_jk B^j_β B^k_γ`
    pub p_ind: Vec<Ten2>,
    /// `G^α_βγ = B^α_i A^i_βγ`, `A^i_βγ = B^i_βγ + G^i_jk B^j_β B^k_γ`
    pub g_ind: Vec<Ten2>,
    /// completeness reconstruction residual of `K^i_βγ`
    pub torsion_reconstruction: f64,
    /// completeness reconstruction residual of `A^i_βγ`
    pub berwald_reconstruction: f64,
    /// `‖P̄^α − P^α‖∞` with the barred projections
    pub torsion_equality: f64,
    /// `‖Ḡ^α − G^α‖∞` likewise
    pub berwald_equality: f64,
}

/// `barred_torsion` / `barred_berwald` are the transformed-space tensors to
/// project; under parallel inputs they coincide with the base tensors and the
/// equality residuals vanish through frame duality alone.
pub fn induced_connections(
    cf: &ChartFrame,
    bch: &BarredChart,
    barred_torsion: &Ten3,
    barred_berwald: &Ten3,
) -> InducedConnections {
    let n = cf.point.dim();
    let d = n - 1;
    let b = &cf.data.b_t;
    let con = &cf.frame.con;

    let contract3 = |t: &Ten3, be: usize, ga: usize| -> Ten1 {
        t1(n, |i| {
            let mut s = 0.0;
            for j in 0..n {
                for k in 0..n {
                    s += t.get(i, j, k) * b[be][j] * b[ga][k];
                }
            }
            s
        })
    };
    let k_full: Vec<Vec<Ten1>> = (0..d)
        .map(|be| {
            (0..d)
                .map(|ga| contract3(&con.hv_torsion, be, ga))
                .collect()
        })
        .collect();
    let a_full: Vec<Vec<Ten1>> = (0..d)
        .map(|be| {
            (0..d)
                .map(|ga| {
                    let mut v = contract3(&con.berwald, be, ga);
                    for i in 0..n {
                        v[i] += cf.data.b_tt[be][ga][i];
                    }
                    v
                })
                .collect()
        })
        .collect();

    let p_ind: Vec<Ten2> = (0..d)
        .map(|al| t2(d, |be, ga| dot(&cf.inv_proj[al], &k_full[be][ga])))
        .collect();
    let g_ind: Vec<Ten2> = (0..d)
        .map(|al| t2(d, |be, ga| dot(&cf.inv_proj[al], &a_full[be][ga])))
        .collect();

    // completeness: K^i = B^i_δ P^δ + B^i B_h K^h (same shape for A and G)
    let reconstruction = |full: &Vec<Vec<Ten1>>, ind: &Vec<Ten2>| -> f64 {
        let mut worst: f64 = 0.0;
        for be in 0..d {
            for ga in 0..d {
                let bk = dot(&cf.normal_low, &full[be][ga]);
                for i in 0..n {
                    let rec: f64 = (0..d).map(|de| b[de][i] * ind[de].get(be, ga)).sum::<f64>()
                        + cf.normal_up[i] * bk;
                    worst = worst.max((rec - full[be][ga][i]).abs());
                }
            }
        }
        worst
    };
    let torsion_reconstruction = reconstruction(&k_full, &p_ind);
    let berwald_reconstruction = reconstruction(&a_full, &g_ind);

    let kbar: Vec<Vec<Ten1>> = (0..d)
        .map(|be| (0..d).map(|ga| contract3(barred_torsion, be, ga)).collect())
        .collect();
    let abar: Vec<Vec<Ten1>> = (0..d)
        .map(|be| {
            (0..d)
                .map(|ga| {
                    let mut v = contract3(barred_berwald, be, ga);
                    for i in 0..n {
                        v[i] += cf.data.b_tt[be][ga][i];
                    }
                    v
                })
                .collect()
        })
        .collect();
    let mut torsion_equality: f64 = 0.0;
    let mut berwald_equality: f64 = 0.0;
    for al in 0..d {
        for be in 0..d {
            for ga in 0..d {
                let pbar = dot(&bch.inv_proj[al], &kbar[be][ga]);
                torsion_equality = torsion_equality.max((pbar - p_ind[al].get(be, ga)).abs());
                let gbar = dot(&bch.inv_proj[al], &abar[be][ga]);
                berwald_equality = berwald_equality.max((gbar - g_ind[al].get(be, ga)).abs());
            }
        }
    }

    InducedConnections {
        p_ind,
        g_ind,
        torsion_reconstruction,
        berwald_reconstruction,
        torsion_equality,
        berwald_equality,
    }
}
