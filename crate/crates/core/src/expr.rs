//! Expression trees for user-described scalar fields.
//!
//! Metric coefficient functions and hypersurface charts are supplied as
//! polynomial / trigonometric expressions so their jets are exact — no
//! interpolation or sampling enters the engine.  `Var(k)` is bound by the
//! evaluation context (x-coordinates for metric coefficients, Gaussian
//! u-coordinates for charts).

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::jets::{Jet, JetSpace};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
    Sqrt(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
}

#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn var(k: usize) -> Expr {
        Expr::Var(k)
    }

    pub fn c(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn add(self, o: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(o))
    }

    pub fn sub(self, o: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(o))
    }

    pub fn mul(self, o: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(o))
    }

    pub fn scale(self, s: f64) -> Expr {
        Expr::Mul(Box::new(Expr::Const(s)), Box::new(self))
    }

    pub fn sin(self) -> Expr {
        Expr::Sin(Box::new(self))
    }

    pub fn cos(self) -> Expr {
        Expr::Cos(Box::new(self))
    }

    pub fn eval_value(&self, vars: &[f64]) -> f64 {
        match self {
            Expr::Const(v) => *v,
            Expr::Var(k) => vars[*k],
            Expr::Add(a, b) => a.eval_value(vars) + b.eval_value(vars),
            Expr::Sub(a, b) => a.eval_value(vars) - b.eval_value(vars),
            Expr::Mul(a, b) => a.eval_value(vars) * b.eval_value(vars),
            Expr::Neg(a) => -a.eval_value(vars),
            Expr::Pow(a, e) => a.eval_value(vars).powi(*e as i32),
            Expr::Sqrt(a) => a.eval_value(vars).sqrt(),
            Expr::Sin(a) => a.eval_value(vars).sin(),
            Expr::Cos(a) => a.eval_value(vars).cos(),
        }
    }

    /// Evaluates into the given jet space; `bind` supplies the coordinate jet
    /// for each variable index.
    pub fn eval_jet(&self, space: &Arc<JetSpace>, bind: &dyn Fn(usize) -> Jet) -> Result<Jet> {
        Ok(match self {
            Expr::Const(v) => Jet::constant(space, *v),
            Expr::Var(k) => bind(*k),
            Expr::Add(a, b) => a.eval_jet(space, bind)?.add(&b.eval_jet(space, bind)?),
            Expr::Sub(a, b) => a.eval_jet(space, bind)?.sub(&b.eval_jet(space, bind)?),
            Expr::Mul(a, b) => a.eval_jet(space, bind)?.mul(&b.eval_jet(space, bind)?),
            Expr::Neg(a) => a.eval_jet(space, bind)?.neg(),
            Expr::Pow(a, e) => a.eval_jet(space, bind)?.powi(*e),
            Expr::Sqrt(a) => a.eval_jet(space, bind)?.sqrt()?,
            Expr::Sin(a) => a.eval_jet(space, bind)?.sin(),
            Expr::Cos(a) => a.eval_jet(space, bind)?.cos(),
        })
    }
}

/// Sparse polynomial in the x-coordinates with real coefficients.
///
/// This is the config-facing description of metric coefficient functions and
/// h-vector components.  Exact partial derivatives are available so test
/// oracles can differentiate coefficients independently of the jet engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poly {
    /// Terms `coeff · Π x_i^powers[i]`.
    pub terms: Vec<PolyTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyTerm {
    pub powers: Vec<u32>,
    pub coeff: f64,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { terms: vec![] }
    }

    pub fn constant(v: f64) -> Poly {
        if v == 0.0 {
            return Poly::zero();
        }
        Poly {
            terms: vec![PolyTerm {
                powers: vec![],
                coeff: v,
            }],
        }
    }

    /// `coeff · x_k`
    pub fn linear(k: usize, coeff: f64) -> Poly {
        let mut powers = vec![0; k + 1];
        powers[k] = 1;
        Poly {
            terms: vec![PolyTerm { powers, coeff }],
        }
    }

    pub fn term(powers: Vec<u32>, coeff: f64) -> Poly {
        Poly {
            terms: vec![PolyTerm { powers, coeff }],
        }
    }

    pub fn plus(mut self, o: Poly) -> Poly {
        self.terms.extend(o.terms);
        self
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.coeff
                    * t.powers
                        .iter()
                        .enumerate()
                        .map(|(i, &p)| x[i].powi(p as i32))
                        .product::<f64>()
            })
            .sum()
    }

    /// Exact partial derivative `∂/∂x_k`.
    pub fn derivative(&self, k: usize) -> Poly {
        let mut terms = Vec::new();
        for t in &self.terms {
            let p = t.powers.get(k).copied().unwrap_or(0);
            if p == 0 {
                continue;
            }
            let mut powers = t.powers.clone();
            powers[k] = p - 1;
            terms.push(PolyTerm {
                powers,
                coeff: t.coeff * p as f64,
            });
        }
        Poly { terms }
    }

    /// Jet of the polynomial, with `Var(i)` bound to the x-coordinate jets.
    pub fn eval_jet(&self, space: &Arc<JetSpace>, x: &[f64]) -> Jet {
        let mut acc = Jet::constant(space, 0.0);
        for t in &self.terms {
            let mut term = Jet::constant(space, t.coeff);
            for (i, &p) in t.powers.iter().enumerate() {
                if p > 0 {
                    term = term.mul(&Jet::var_x(space, i, x[i]).powi(p));
                }
            }
            acc = acc.add(&term);
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coeff == 0.0)
    }

    pub fn max_power(&self) -> u32 {
        self.terms
            .iter()
            .map(|t| t.powers.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::JetSpace;

    #[test]
    fn expr_value_and_jet_agree() {
        // f(u) = sin(u0) * cos(u1) + u0^2
        let f = Expr::var(0)
            .sin()
            .mul(Expr::var(1).cos())
            .add(Expr::Pow(Box::new(Expr::var(0)), 2));
        let u = [0.3, 1.1];
        let sp = JetSpace::new(0, 0, 2, 2).unwrap();
        let j = f.eval_jet(&sp, &|k| Jet::var_y(&sp, k, u[k])).unwrap();
        assert!((j.value() - f.eval_value(&u)).abs() < 1e-15);
        // first derivative vs calculus
        let want = 0.3f64.cos() * 1.1f64.cos() + 2.0 * 0.3;
        assert!((j.dy(0) - want).abs() < 1e-14);
    }

    #[test]
    fn poly_derivative_is_exact() {
        // 2 x0^2 x1 - 0.5 x1
        let p = Poly::term(vec![2, 1], 2.0).plus(Poly::term(vec![0, 1], -0.5));
        let d0 = p.derivative(0);
        assert_eq!(d0.eval(&[1.5, 2.0]), 4.0 * 1.5 * 2.0);
        let d1 = p.derivative(1);
        assert_eq!(d1.eval(&[1.5, 2.0]), 2.0 * 1.5 * 1.5 - 0.5);
    }

    #[test]
    fn poly_jet_matches_eval() {
        let p = Poly::term(vec![1, 2], 3.0);
        let sp = JetSpace::new(2, 1, 2, 1).unwrap();
        let x = [0.4, -1.2];
        let j = p.eval_jet(&sp, &x);
        assert!((j.value() - p.eval(&x)).abs() < 1e-15);
        assert!((j.dx(0) - p.derivative(0).eval(&x)).abs() < 1e-13);
    }
}
