//! Truncated multivariate Taylor arithmetic ("jets") over a point-direction.
//!
//! A jet stores every partial derivative of a scalar field `f(x, y)` up to a
//! per-group cap (x-order ≤ 1, y-order ≤ 5 at most), as Taylor coefficients
//! `∂^α_x ∂^β_y f / (α! β!)`.  Arithmetic (`+ − × ÷ √ sin cos`) propagates the
//! truncation exactly, so polynomial metric data yields machine-exact
//! derivatives.  A central finite-difference oracle lives alongside for
//! cross-checking the non-polynomial built-ins.
//!
//! All jets are immutable after construction and safe to share across
//! threads.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{HmxError, Result};

/// Hard engine limits on the truncation caps.
pub const MAX_X_CAP: u32 = 1;
pub const MAX_Y_CAP: u32 = 5;

/// Constant terms smaller than this make a jet non-invertible.
pub const DIV_GUARD: f64 = 1e-12;

/// Shared index bookkeeping for one `(nx, xcap, ny, ycap)` shape.
///
/// The coefficient lattice is the product of the two per-group multi-index
/// sets, so a coefficient table is a dense `nx_idx × ny_idx` matrix and
/// multiplication walks precomputed per-group sum tables.
#[derive(Debug)]
pub struct JetSpace {
    pub nx: usize,
    pub xcap: u32,
    pub ny: usize,
    pub ycap: u32,
    x_group: IndexGroup,
    y_group: IndexGroup,
}

#[derive(Debug)]
struct IndexGroup {
    /// Multi-indices in graded lexicographic order; position 0 is the empty index.
    idx: Vec<Vec<u32>>,
    pos: HashMap<Vec<u32>, u32>,
    /// `sum[a * len + b]` is the position of `idx[a] + idx[b]`, or `u32::MAX`.
    sum: Vec<u32>,
    /// `α!` per position.
    factorial: Vec<f64>,
}

fn enumerate_multi_indices(vars: usize, cap: u32) -> Vec<Vec<u32>> {
    let mut out: Vec<Vec<u32>> = Vec::new();
    let mut cur = vec![0u32; vars];
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
    if vars == 0 {
        return vec![vec![]];
    }
    rec(&mut out, &mut cur, 0, cap);
    out.sort_by_key(|m| (m.iter().sum::<u32>(), m.clone()));
    out
}

impl IndexGroup {
    fn new(vars: usize, cap: u32) -> Self {
        let idx = enumerate_multi_indices(vars, cap);
        let pos: HashMap<Vec<u32>, u32> = idx
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i as u32))
            .collect();
        let len = idx.len();
        let mut sum = vec![u32::MAX; len * len];
        for (a, ma) in idx.iter().enumerate() {
            for (b, mb) in idx.iter().enumerate() {
                let total: u32 = ma.iter().sum::<u32>() + mb.iter().sum::<u32>();
                if total <= cap {
                    let m: Vec<u32> = ma.iter().zip(mb).map(|(p, q)| p + q).collect();
                    sum[a * len + b] = pos[&m];
                }
            }
        }
        let factorial = idx
            .iter()
            .map(|m| {
                m.iter()
                    .map(|&k| (1..=k as u64).product::<u64>() as f64)
                    .product()
            })
            .collect();
        IndexGroup {
            idx,
            pos,
            sum,
            factorial,
        }
    }

    fn len(&self) -> usize {
        self.idx.len()
    }
}

impl JetSpace {
    pub fn new(nx: usize, xcap: u32, ny: usize, ycap: u32) -> Result<Arc<JetSpace>> {
        if xcap > MAX_X_CAP || ycap > MAX_Y_CAP {
            return Err(HmxError::JetCap(format!(
                "requested caps ({xcap}, {ycap}) exceed engine limits ({MAX_X_CAP}, {MAX_Y_CAP})"
            )));
        }
        Ok(Arc::new(JetSpace {
            nx,
            xcap,
            ny,
            ycap,
            x_group: IndexGroup::new(nx, xcap),
            y_group: IndexGroup::new(ny, ycap),
        }))
    }

    pub fn len(&self) -> usize {
        self.x_group.len() * self.y_group.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn same_shape(&self, other: &JetSpace) -> bool {
        self.nx == other.nx
            && self.xcap == other.xcap
            && self.ny == other.ny
            && self.ycap == other.ycap
    }

    /// Maximum total order representable; series for `÷ √ sin cos` run this deep.
    fn series_order(&self) -> u32 {
        self.xcap + self.ycap
    }
}

/// Truncated Taylor expansion of a scalar field at one point-direction.
#[derive(Debug, Clone)]
pub struct Jet {
    pub space: Arc<JetSpace>,
    /// Dense coefficients, laid out `[x_idx][y_idx]`.
    c: Vec<f64>,
}

#[allow(clippy::should_implement_trait)]
impl Jet {
    pub fn constant(space: &Arc<JetSpace>, v: f64) -> Jet {
        let mut c = vec![0.0; space.len()];
        c[0] = v;
        Jet {
            space: space.clone(),
            c,
        }
    }

    /// Coordinate jet for `x^i` (constant part = current coordinate value).
    pub fn var_x(space: &Arc<JetSpace>, i: usize, value: f64) -> Jet {
        let mut j = Jet::constant(space, value);
        if space.xcap >= 1 {
            let mut m = vec![0u32; space.nx];
            m[i] = 1;
            let xi = space.x_group.pos[&m] as usize;
            j.c[xi * space.y_group.len()] = 1.0;
        }
        j
    }

    /// Coordinate jet for `y^i`.
    pub fn var_y(space: &Arc<JetSpace>, i: usize, value: f64) -> Jet {
        let mut j = Jet::constant(space, value);
        if space.ycap >= 1 {
            let mut m = vec![0u32; space.ny];
            m[i] = 1;
            let yi = space.y_group.pos[&m] as usize;
            j.c[yi] = 1.0;
        }
        j
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    fn check_same(&self, other: &Jet) {
        assert!(
            self.space.same_shape(&other.space),
            "jet arithmetic across different spaces"
        );
    }

    pub fn add(&self, other: &Jet) -> Jet {
        self.check_same(other);
        Jet {
            space: self.space.clone(),
            c: self.c.iter().zip(&other.c).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        self.check_same(other);
        Jet {
            space: self.space.clone(),
            c: self.c.iter().zip(&other.c).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn neg(&self) -> Jet {
        self.scale(-1.0)
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            space: self.space.clone(),
            c: self.c.iter().map(|a| a * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut j = self.clone();
        j.c[0] += s;
        j
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        self.check_same(other);
        let sp = &self.space;
        let nxl = sp.x_group.len();
        let nyl = sp.y_group.len();
        let mut c = vec![0.0; sp.len()];
        for xa in 0..nxl {
            for xb in 0..nxl {
                let xs = sp.x_group.sum[xa * nxl + xb];
                if xs == u32::MAX {
                    continue;
                }
                let row_a = xa * nyl;
                let row_b = xb * nyl;
                let row_o = xs as usize * nyl;
                for ya in 0..nyl {
                    let av = self.c[row_a + ya];
                    if av == 0.0 {
                        continue;
                    }
                    let sums = &sp.y_group.sum[ya * nyl..(ya + 1) * nyl];
                    for (yb, &ys) in sums.iter().enumerate() {
                        if ys == u32::MAX {
                            continue;
                        }
                        c[row_o + ys as usize] += av * other.c[row_b + yb];
                    }
                }
            }
        }
        Jet {
            space: sp.clone(),
            c,
        }
    }

    /// Composes a univariate power series `Σ coef_k · u^k` with the
    /// zero-constant-term jet `u`; exact because `u` is nilpotent.
    fn compose_series(u: &Jet, coefs: &[f64]) -> Jet {
        let mut acc = Jet::constant(&u.space, coefs[coefs.len() - 1]);
        for &ck in coefs.iter().rev().skip(1) {
            acc = acc.mul(u).add_scalar(ck);
        }
        acc
    }

    /// Splits off the constant term: returns `(c0, u)` with `self = c0·(1 + u)`.
    fn normalized_tail(&self) -> Result<(f64, Jet)> {
        let c0 = self.c[0];
        if c0.abs() < DIV_GUARD {
            return Err(HmxError::JetSingular(format!(
                "constant term {c0:.3e} below {DIV_GUARD:.0e}"
            )));
        }
        let mut u = self.scale(1.0 / c0);
        u.c[0] = 0.0;
        Ok((c0, u))
    }

    pub fn recip(&self) -> Result<Jet> {
        let (c0, u) = self.normalized_tail()?;
        let k = self.space.series_order() as usize;
        let coefs: Vec<f64> = (0..=k)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        Ok(Jet::compose_series(&u, &coefs).scale(1.0 / c0))
    }

    pub fn div(&self, other: &Jet) -> Result<Jet> {
        Ok(self.mul(&other.recip()?))
    }

    pub fn sqrt(&self) -> Result<Jet> {
        let c0 = self.c[0];
        if c0 < DIV_GUARD {
            return Err(HmxError::JetSingular(format!(
                "sqrt of jet with constant term {c0:.3e}"
            )));
        }
        let (_, u) = self.normalized_tail()?;
        let k = self.space.series_order() as usize;
        let mut coefs = vec![0.0; k + 1];
        coefs[0] = 1.0;
        for i in 1..=k {
            coefs[i] = coefs[i - 1] * (0.5 - (i as f64 - 1.0)) / i as f64;
        }
        Ok(Jet::compose_series(&u, &coefs).scale(c0.sqrt()))
    }

    pub fn sin(&self) -> Jet {
        let (s0, c0) = self.c[0].sin_cos();
        let mut u = self.clone();
        u.c[0] = 0.0;
        let (su, cu) = u.sin_cos_tail();
        su.scale(c0).add(&cu.scale(s0))
    }

    pub fn cos(&self) -> Jet {
        let (s0, c0) = self.c[0].sin_cos();
        let mut u = self.clone();
        u.c[0] = 0.0;
        let (su, cu) = u.sin_cos_tail();
        cu.scale(c0).sub(&su.scale(s0))
    }

    /// `(sin u, cos u)` for a zero-constant-term jet.
    fn sin_cos_tail(&self) -> (Jet, Jet) {
        let k = self.space.series_order() as usize;
        let mut sin_c = vec![0.0; k + 1];
        let mut cos_c = vec![0.0; k + 1];
        let mut fact = 1.0;
        for i in 0..=k {
            if i > 0 {
                fact *= i as f64;
            }
            match i % 4 {
                0 => cos_c[i] = 1.0 / fact,
                1 => sin_c[i] = 1.0 / fact,
                2 => cos_c[i] = -1.0 / fact,
                _ => sin_c[i] = -1.0 / fact,
            }
        }
        (
            Jet::compose_series(self, &sin_c),
            Jet::compose_series(self, &cos_c),
        )
    }

    pub fn powi(&self, mut e: u32) -> Jet {
        let mut acc = Jet::constant(&self.space, 1.0);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Raw partial derivative `∂^α_x ∂^β_y f` (coefficient × `α!β!`).
    pub fn partial(&self, xm: &[u32], ym: &[u32]) -> Result<f64> {
        let sp = &self.space;
        let xp = sp.x_group.pos.get(xm).copied().ok_or_else(|| {
            HmxError::JetCap(format!(
                "x index {xm:?} outside caps ({}, {})",
                sp.xcap, sp.ycap
            ))
        })?;
        let yp = sp.y_group.pos.get(ym).copied().ok_or_else(|| {
            HmxError::JetCap(format!(
                "y index {ym:?} outside caps ({}, {})",
                sp.xcap, sp.ycap
            ))
        })?;
        let f = sp.x_group.factorial[xp as usize] * sp.y_group.factorial[yp as usize];
        Ok(self.c[xp as usize * sp.y_group.len() + yp as usize] * f)
    }

    /// Convenience lookups for y-derivatives up to fourth order and one mixed
    /// x-derivative; these drive the tensor assembly.
    pub fn dy(&self, i: usize) -> f64 {
        self.partial(&vec![0; self.space.nx], &unit(self.space.ny, &[i]))
            .unwrap()
    }

    pub fn dyy(&self, i: usize, j: usize) -> f64 {
        self.partial(&vec![0; self.space.nx], &unit(self.space.ny, &[i, j]))
            .unwrap()
    }

    pub fn dyyy(&self, i: usize, j: usize, k: usize) -> f64 {
        self.partial(&vec![0; self.space.nx], &unit(self.space.ny, &[i, j, k]))
            .unwrap()
    }

    pub fn dyyyy(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.partial(&vec![0; self.space.nx], &unit(self.space.ny, &[i, j, k, l]))
            .unwrap()
    }

    pub fn dx(&self, m: usize) -> f64 {
        self.partial(&unit(self.space.nx, &[m]), &vec![0; self.space.ny])
            .unwrap()
    }

    pub fn dx_dy(&self, m: usize, i: usize) -> f64 {
        self.partial(&unit(self.space.nx, &[m]), &unit(self.space.ny, &[i]))
            .unwrap()
    }

    pub fn dx_dyy(&self, m: usize, i: usize, j: usize) -> f64 {
        self.partial(&unit(self.space.nx, &[m]), &unit(self.space.ny, &[i, j]))
            .unwrap()
    }

    pub fn dx_dyyy(&self, m: usize, i: usize, j: usize, k: usize) -> f64 {
        self.partial(&unit(self.space.nx, &[m]), &unit(self.space.ny, &[i, j, k]))
            .unwrap()
    }

    /// The jet of `∂f/∂y^i`, living one y-order lower.
    pub fn y_derivative(&self, i: usize, target: &Arc<JetSpace>) -> Result<Jet> {
        let sp = &self.space;
        if target.nx != sp.nx || target.ny != sp.ny || target.xcap != sp.xcap {
            return Err(HmxError::JetCap("derivative target space mismatch".into()));
        }
        if target.ycap + 1 > sp.ycap {
            return Err(HmxError::JetCap(format!(
                "y-derivative needs source cap ≥ {} (have {})",
                target.ycap + 1,
                sp.ycap
            )));
        }
        let mut out = Jet::constant(target, 0.0);
        for (yp, ym) in target.y_group.idx.iter().enumerate() {
            let mut shifted = ym.clone();
            shifted[i] += 1;
            let src_y = sp.y_group.pos[&shifted] as usize;
            let mult = shifted[i] as f64;
            for xp in 0..target.x_group.len() {
                // x-group enumerations agree because nx and xcap agree
                out.c[xp * target.y_group.len() + yp] =
                    self.c[xp * sp.y_group.len() + src_y] * mult;
            }
        }
        Ok(out)
    }

    /// Truncation to a smaller-capped space with the same variables.
    pub fn restrict(&self, target: &Arc<JetSpace>) -> Result<Jet> {
        let sp = &self.space;
        if target.nx != sp.nx
            || target.ny != sp.ny
            || target.xcap > sp.xcap
            || target.ycap > sp.ycap
        {
            return Err(HmxError::JetCap("restrict target must shrink caps".into()));
        }
        let mut out = Jet::constant(target, 0.0);
        for (xp, xm) in target.x_group.idx.iter().enumerate() {
            let sxp = sp.x_group.pos[xm] as usize;
            for (yp, ym) in target.y_group.idx.iter().enumerate() {
                let syp = sp.y_group.pos[ym] as usize;
                out.c[xp * target.y_group.len() + yp] = self.c[sxp * sp.y_group.len() + syp];
            }
        }
        Ok(out)
    }
}

fn unit(vars: usize, hits: &[usize]) -> Vec<u32> {
    let mut m = vec![0u32; vars];
    for &h in hits {
        m[h] += 1;
    }
    m
}

/// One differentiation axis for the finite-difference oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X(usize),
    Y(usize),
}

/// Central-difference estimate of a (possibly mixed) partial derivative of
/// order ≤ 3.  Truncation error is `O(step²)` per axis.
pub fn fd_oracle(
    f: &dyn Fn(&[f64], &[f64]) -> f64,
    x: &[f64],
    y: &[f64],
    axes: &[Axis],
    step: f64,
) -> Result<f64> {
    if axes.len() > 3 {
        return Err(HmxError::JetCap(format!(
            "finite-difference oracle supports order ≤ 3, got {}",
            axes.len()
        )));
    }
    if step <= 0.0 {
        return Err(HmxError::Config("fd step must be positive".into()));
    }
    Ok(fd_rec(f, x, y, axes, step))
}

fn fd_rec(
    f: &dyn Fn(&[f64], &[f64]) -> f64,
    x: &[f64],
    y: &[f64],
    axes: &[Axis],
    step: f64,
) -> f64 {
    match axes.split_first() {
        None => f(x, y),
        Some((&axis, rest)) => {
            let mut xp = x.to_vec();
            let mut yp = y.to_vec();
            let mut xm = x.to_vec();
            let mut ym = y.to_vec();
            match axis {
                Axis::X(i) => {
                    xp[i] += step;
                    xm[i] -= step;
                }
                Axis::Y(i) => {
                    yp[i] += step;
                    ym[i] -= step;
                }
            }
            (fd_rec(f, &xp, &yp, rest, step) - fd_rec(f, &xm, &ym, rest, step)) / (2.0 * step)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(nx: usize, xc: u32, ny: usize, yc: u32) -> Arc<JetSpace> {
        JetSpace::new(nx, xc, ny, yc).unwrap()
    }

    fn norm_sq(sp: &Arc<JetSpace>, y: &[f64]) -> Jet {
        let mut s = Jet::constant(sp, 0.0);
        for (i, &v) in y.iter().enumerate() {
            let yi = Jet::var_y(sp, i, v);
            s = s.add(&yi.mul(&yi));
        }
        s
    }

    #[test]
    fn polynomial_derivatives_are_exact() {
        // f = Σ (y^i)² at y = (3, 4)
        let sp = space(2, 1, 2, 4);
        let f = norm_sq(&sp, &[3.0, 4.0]);
        assert_eq!(f.value(), 25.0);
        assert_eq!(f.dy(0), 6.0);
        assert_eq!(f.dyy(0, 0), 2.0);
        assert_eq!(f.dyy(0, 1), 0.0);
    }

    #[test]
    fn constant_jet_has_zero_derivatives() {
        let sp = space(2, 1, 2, 4);
        let c = Jet::constant(&sp, 7.5);
        assert_eq!(c.value(), 7.5);
        assert_eq!(c.dy(1), 0.0);
        assert_eq!(c.dx(0), 0.0);
    }

    #[test]
    fn mixed_x_y_field_matches_hand_values() {
        // f = sqrt(Σ y²) · (1 + 0.1 x¹) at x = 0, y = (3, 4)
        let sp = space(2, 1, 2, 4);
        let r = norm_sq(&sp, &[3.0, 4.0]).sqrt().unwrap();
        let x1 = Jet::var_x(&sp, 0, 0.0);
        let f = r.mul(&x1.scale(0.1).add_scalar(1.0));
        assert!((f.dx(0) - 0.5).abs() < 1e-12);
        assert!((f.dy(0) - 0.6).abs() < 1e-12);
        // cross-check against the finite-difference oracle
        let eval = |x: &[f64], y: &[f64]| (y[0] * y[0] + y[1] * y[1]).sqrt() * (1.0 + 0.1 * x[0]);
        let fd_x = fd_oracle(&eval, &[0.0, 0.0], &[3.0, 4.0], &[Axis::X(0)], 1e-5).unwrap();
        let fd_y = fd_oracle(&eval, &[0.0, 0.0], &[3.0, 4.0], &[Axis::Y(0)], 1e-5).unwrap();
        assert!((f.dx(0) - fd_x).abs() < 1e-6);
        assert!((f.dy(0) - fd_y).abs() < 1e-6);
    }

    #[test]
    fn product_rule_holds_coefficientwise() {
        let sp = space(2, 1, 2, 4);
        let mut rng = 1234567u64;
        let mut next = || {
            rng = rng
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((rng >> 33) as f64 / (1u64 << 31) as f64) - 1.0
        };
        let rand_jet = |next: &mut dyn FnMut() -> f64| {
            let mut j = Jet::constant(&sp, 0.0);
            for c in j.c.iter_mut() {
                *c = next();
            }
            j
        };
        for _ in 0..20 {
            let a = rand_jet(&mut next);
            let b = rand_jet(&mut next);
            let ab = a.mul(&b);
            let ba = b.mul(&a);
            for (p, q) in ab.c.iter().zip(&ba.c) {
                assert!((p - q).abs() <= 1e-12 * p.abs().max(1.0));
            }
            // linearity against a third jet
            let c = rand_jet(&mut next);
            let lhs = a.add(&b).mul(&c);
            let rhs = a.mul(&c).add(&b.mul(&c));
            for (p, q) in lhs.c.iter().zip(&rhs.c) {
                assert!((p - q).abs() <= 1e-12 * p.abs().max(1.0));
            }
        }
    }

    #[test]
    fn division_and_sqrt_invert_multiplication() {
        let sp = space(1, 1, 2, 4);
        let x = Jet::var_x(&sp, 0, 0.4);
        let y0 = Jet::var_y(&sp, 0, 1.3);
        let y1 = Jet::var_y(&sp, 1, -0.7);
        let f = y0.mul(&y0).add(&y1.mul(&x)).add_scalar(2.0);
        let g = f.sqrt().unwrap();
        let back = g.mul(&g);
        for (p, q) in back.c.iter().zip(&f.c) {
            assert!((p - q).abs() < 1e-12);
        }
        let r = f.recip().unwrap();
        let one = f.mul(&r);
        assert!((one.value() - 1.0).abs() < 1e-14);
        for &c in one.c.iter().skip(1) {
            assert!(c.abs() < 1e-12);
        }
    }

    #[test]
    fn division_by_near_zero_constant_is_an_error() {
        let sp = space(1, 1, 1, 3);
        let f = Jet::var_y(&sp, 0, 1e-13);
        assert!(matches!(f.recip(), Err(HmxError::JetSingular(_))));
    }

    #[test]
    fn caps_are_enforced() {
        assert!(matches!(
            JetSpace::new(2, 2, 2, 4),
            Err(HmxError::JetCap(_))
        ));
        assert!(matches!(
            JetSpace::new(2, 1, 2, 6),
            Err(HmxError::JetCap(_))
        ));
        let sp = space(2, 1, 2, 2);
        let f = norm_sq(&sp, &[3.0, 4.0]);
        assert!(matches!(
            f.partial(&[0, 0], &[3, 0]),
            Err(HmxError::JetCap(_))
        ));
    }

    #[test]
    fn sin_cos_match_calculus() {
        let sp = space(0, 0, 1, 2);
        let u = Jet::var_y(&sp, 0, 0.8);
        let s = u.sin();
        assert!((s.value() - 0.8f64.sin()).abs() < 1e-15);
        assert!((s.dy(0) - 0.8f64.cos()).abs() < 1e-14);
        assert!((s.dyy(0, 0) + 0.8f64.sin()).abs() < 1e-14);
        let c = u.cos();
        assert!((c.dy(0) + 0.8f64.sin()).abs() < 1e-14);
    }

    #[test]
    fn y_derivative_shifts_coefficients() {
        let sp5 = space(1, 1, 2, 3);
        let sp4 = space(1, 1, 2, 2);
        let y0 = Jet::var_y(&sp5, 0, 2.0);
        let y1 = Jet::var_y(&sp5, 1, 3.0);
        let f = y0.powi(2).mul(&y1); // y0² y1
        let df = f.y_derivative(0, &sp4).unwrap(); // 2 y0 y1
        assert_eq!(df.value(), 12.0);
        assert_eq!(df.dy(0), 6.0);
        assert_eq!(df.dy(1), 4.0);
        assert_eq!(df.dyy(0, 1), 2.0);
    }

    #[test]
    fn fd_oracle_known_values() {
        // ∂|y|/∂y¹∂y² at y = (3,4) is -12/125
        let f = |_: &[f64], y: &[f64]| (y[0] * y[0] + y[1] * y[1]).sqrt();
        let v = fd_oracle(
            &f,
            &[0.0, 0.0],
            &[3.0, 4.0],
            &[Axis::Y(0), Axis::Y(1)],
            1e-4,
        )
        .unwrap();
        assert!((v + 0.096).abs() < 1e-5);
        // ∂(Σ y²)/∂y¹ = 6 at y = (3,4)
        let g = |_: &[f64], y: &[f64]| y[0] * y[0] + y[1] * y[1];
        let v = fd_oracle(&g, &[0.0, 0.0], &[3.0, 4.0], &[Axis::Y(0)], 1e-4).unwrap();
        assert!((v - 6.0).abs() < 1e-7);
        // constants differentiate to exactly zero
        let c = |_: &[f64], _: &[f64]| 4.25;
        let v = fd_oracle(&c, &[0.0], &[1.0], &[Axis::Y(0)], 1e-4).unwrap();
        assert_eq!(v, 0.0);
        // order > 3 rejected
        let a = [Axis::Y(0); 4];
        assert!(fd_oracle(&g, &[0.0, 0.0], &[3.0, 4.0], &a, 1e-4).is_err());
    }
}
