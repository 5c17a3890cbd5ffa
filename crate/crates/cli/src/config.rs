//! Run configuration: one TOML document per run, schema-validated, with all
//! defaults materialized into the echoed effective config.

use serde::{Deserialize, Serialize};

use hmx_core::error::{HmxError, Result};
use hmx_core::expr::{Expr, Poly};
use hmx_core::hvector::{HVectorField, HVectorMode};
use hmx_core::hypersurface::Chart;
use hmx_core::sample::SampleBox;
use hmx_core::space::{FinslerSpace, MetricFamily};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; block-level seeds default to values derived from it.
    pub seed: Option<u64>,
    pub space: SpaceCfg,
    pub hvector: Option<HVectorCfg>,
    pub points: Option<PointsCfg>,
    pub hypersurface: Option<HypersurfaceCfg>,
    pub fixtures: Option<FixturesCfg>,
    pub search: Option<SearchCfg>,
    pub tolerances: Option<Tolerances>,
    pub output: Option<OutputCfg>,
    pub probes: Option<ProbesCfg>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceCfg {
    pub family: String,
    pub dim: usize,
    /// diagonal coefficients (riemann_diag)
    pub coeffs: Option<Vec<Poly>>,
    /// symmetric coefficient matrix (riemann, randers)
    pub a: Option<Vec<Vec<Poly>>>,
    /// one-form coefficients (randers)
    pub c: Option<Vec<Poly>>,
    /// constant one-form shorthand (randers)
    pub c_const: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HVectorCfg {
    pub mode: Option<String>,
    pub rho0: f64,
    pub c: Option<Vec<Poly>>,
    pub c_const: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointsCfg {
    /// explicit point-directions; when present the sampler fields are unused
    pub list: Option<Vec<PointCfg>>,
    pub count: Option<usize>,
    pub seed: Option<u64>,
    pub box_x: Option<[f64; 2]>,
    pub box_y: Option<[f64; 2]>,
    pub min_y_norm: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointCfg {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypersurfaceCfg {
    pub family: String,
    pub axis: Option<usize>,
    pub offset: Option<f64>,
    pub radius: Option<f64>,
    pub center: Option<Vec<f64>>,
    /// graph height function (polynomial in the Gaussian coordinates)
    pub graph: Option<Poly>,
    pub samples: Vec<UVCfg>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UVCfg {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixturesCfg {
    pub count: Option<usize>,
    pub generic_e: Option<usize>,
    pub oblique: Option<usize>,
    pub seed: Option<u64>,
    pub n: Option<usize>,
    pub big_l: Option<f64>,
    pub rho: Option<f64>,
    pub tau: Option<f64>,
}

/// Fixture parameters with every default materialized.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FixturesResolved {
    pub count: usize,
    pub generic_e: usize,
    pub oblique: usize,
    pub seed: u64,
    pub n: usize,
    pub big_l: f64,
    pub rho: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchCfg {
    pub degree: Option<u32>,
    pub rho0_grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub frame: Option<f64>,
    pub l_homogeneity: Option<f64>,
    pub transform_rel: Option<f64>,
    pub ginv: Option<f64>,
    pub scalars: Option<f64>,
    pub remark: Option<f64>,
    pub eq2: Option<f64>,
    pub ef_reconstruction: Option<f64>,
    pub parallel: Option<f64>,
    pub chain: Option<f64>,
    pub fixture_condition: Option<f64>,
    pub hs_frame: Option<f64>,
    pub hs_contraction: Option<f64>,
    pub rel_deriv: Option<f64>,
    pub hs_barred: Option<f64>,
    pub induced_reconstruction: Option<f64>,
    pub induced_equality: Option<f64>,
    pub eps_cls: Option<f64>,
    pub gate: Option<f64>,
    pub tangency: Option<f64>,
}

/// Fully materialized tolerance set.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Tols {
    pub frame: f64,
    pub l_homogeneity: f64,
    pub transform_rel: f64,
    pub ginv: f64,
    pub scalars: f64,
    pub remark: f64,
    pub eq2: f64,
    pub ef_reconstruction: f64,
    pub parallel: f64,
    pub chain: f64,
    pub fixture_condition: f64,
    pub hs_frame: f64,
    pub hs_contraction: f64,
    pub rel_deriv: f64,
    pub hs_barred: f64,
    pub induced_reconstruction: f64,
    pub induced_equality: f64,
    pub eps_cls: f64,
    pub gate: f64,
    pub tangency: f64,
}

impl Tols {
    pub fn from_cfg(t: &Option<Tolerances>) -> Tols {
        let t = t.unwrap_or(Tolerances {
            frame: None,
            l_homogeneity: None,
            transform_rel: None,
            ginv: None,
            scalars: None,
            remark: None,
            eq2: None,
            ef_reconstruction: None,
            parallel: None,
            chain: None,
            fixture_condition: None,
            hs_frame: None,
            hs_contraction: None,
            rel_deriv: None,
            hs_barred: None,
            induced_reconstruction: None,
            induced_equality: None,
            eps_cls: None,
            gate: None,
            tangency: None,
        });
        Tols {
            frame: t.frame.unwrap_or(1e-8),
            l_homogeneity: t.l_homogeneity.unwrap_or(1e-10),
            transform_rel: t.transform_rel.unwrap_or(1e-8),
            ginv: t.ginv.unwrap_or(1e-9),
            scalars: t.scalars.unwrap_or(1e-12),
            remark: t.remark.unwrap_or(1e-11),
            eq2: t.eq2.unwrap_or(1e-9),
            ef_reconstruction: t.ef_reconstruction.unwrap_or(1e-13),
            parallel: t.parallel.unwrap_or(1e-12),
            chain: t.chain.unwrap_or(1e-10),
            fixture_condition: t.fixture_condition.unwrap_or(1e-12),
            hs_frame: t.hs_frame.unwrap_or(1e-10),
            hs_contraction: t.hs_contraction.unwrap_or(1e-9),
            rel_deriv: t.rel_deriv.unwrap_or(1e-7),
            hs_barred: t.hs_barred.unwrap_or(1e-9),
            induced_reconstruction: t.induced_reconstruction.unwrap_or(1e-9),
            induced_equality: t.induced_equality.unwrap_or(1e-12),
            eps_cls: t.eps_cls.unwrap_or(1e-8),
            gate: t.gate.unwrap_or(1e-9),
            tangency: t.tangency.unwrap_or(1e-9),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputCfg {
    pub format: Option<String>,
    pub path: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbesCfg {
    pub optional: Option<bool>,
    pub parallel_collapse: Option<bool>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig> {
        toml::from_str(text).map_err(|e| HmxError::config(format!("config parse error: {e}")))
    }

    pub fn master_seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    /// Replaces every seed in the document (the `--seed-override` flag).
    pub fn override_seed(&mut self, seed: u64) {
        self.seed = Some(seed);
        if let Some(p) = &mut self.points {
            p.seed = None;
        }
        if let Some(f) = &mut self.fixtures {
            f.seed = None;
        }
    }

    pub fn space(&self) -> Result<FinslerSpace> {
        let n = self.space.dim;
        let identity = || -> Vec<Vec<Poly>> {
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
        };
        let family = match self.space.family.as_str() {
            "euclidean" => MetricFamily::Euclidean,
            "riemann_diag" => {
                let coeffs = self
                    .space
                    .coeffs
                    .clone()
                    .ok_or_else(|| HmxError::config("riemann_diag needs [space] coeffs"))?;
                MetricFamily::RiemannDiag(coeffs)
            }
            "riemann" => {
                let a = self
                    .space
                    .a
                    .clone()
                    .ok_or_else(|| HmxError::config("riemann needs [space] a matrix"))?;
                MetricFamily::Riemann(a)
            }
            "randers" => {
                let a = self.space.a.clone().unwrap_or_else(identity);
                let c = match (&self.space.c, &self.space.c_const) {
                    (Some(c), _) => c.clone(),
                    (None, Some(cc)) => cc.iter().map(|&v| Poly::constant(v)).collect(),
                    (None, None) => {
                        return Err(HmxError::config("randers needs [space] c or c_const"))
                    }
                };
                MetricFamily::Randers { a, c }
            }
            other => {
                return Err(HmxError::config(format!(
                    "unknown metric family '{other}' (euclidean, riemann_diag, riemann, randers)"
                )))
            }
        };
        FinslerSpace::new(n, family)
    }

    pub fn hvector(&self) -> Result<HVectorField> {
        let cfg = self
            .hvector
            .as_ref()
            .ok_or_else(|| HmxError::config("this command needs an [hvector] block"))?;
        let mode = cfg.mode.as_deref().unwrap_or("weak");
        if mode != "weak" {
            return Err(HmxError::config(format!(
                "unsupported h-vector mode '{mode}' (only 'weak' fields are constructible)"
            )));
        }
        let c = match (&cfg.c, &cfg.c_const) {
            (Some(c), _) => c.clone(),
            (None, Some(cc)) => cc.iter().map(|&v| Poly::constant(v)).collect(),
            (None, None) => vec![Poly::zero(); self.space.dim],
        };
        if c.len() != self.space.dim {
            return Err(HmxError::config(
                "[hvector] c must have one component per dimension",
            ));
        }
        let mut f = HVectorField::weak(cfg.rho0, c)?;
        f.mode = HVectorMode::Weak;
        Ok(f)
    }

    pub fn points(&self) -> Result<Vec<hmx_core::PointDirection>> {
        let n = self.space.dim;
        let cfg = self.points.clone().unwrap_or(PointsCfg {
            list: None,
            count: None,
            seed: None,
            box_x: None,
            box_y: None,
            min_y_norm: None,
        });
        if let Some(list) = cfg.list {
            return list
                .into_iter()
                .map(|p| hmx_core::PointDirection::new(p.x, p.y))
                .collect();
        }
        let dflt = SampleBox::default();
        let sbox = SampleBox {
            x_lo: cfg.box_x.map_or(dflt.x_lo, |b| b[0]),
            x_hi: cfg.box_x.map_or(dflt.x_hi, |b| b[1]),
            y_lo: cfg.box_y.map_or(dflt.y_lo, |b| b[0]),
            y_hi: cfg.box_y.map_or(dflt.y_hi, |b| b[1]),
            min_y_norm: cfg.min_y_norm.unwrap_or(dflt.min_y_norm),
        };
        hmx_core::sample::sample_points(n, cfg.count.unwrap_or(20), self.points_seed(), &sbox)
    }

    pub fn chart(&self) -> Result<(Chart, Vec<UVCfg>)> {
        let n = self.space.dim;
        let cfg = self
            .hypersurface
            .as_ref()
            .ok_or_else(|| HmxError::config("this command needs a [hypersurface] block"))?;
        if cfg.samples.is_empty() {
            return Err(HmxError::config(
                "[hypersurface] needs at least one (u, v) sample",
            ));
        }
        let chart = match cfg.family.as_str() {
            "hyperplane" => {
                Chart::hyperplane(n, cfg.axis.unwrap_or(n - 1), cfg.offset.unwrap_or(0.0))?
            }
            "sphere" => Chart::sphere(
                n,
                cfg.radius.unwrap_or(1.0),
                &cfg.center.clone().unwrap_or_else(|| vec![0.0; n]),
            )?,
            "graph" => {
                let f = cfg
                    .graph
                    .as_ref()
                    .ok_or_else(|| HmxError::config("graph chart needs a height polynomial"))?;
                Chart::graph(n, poly_to_expr(f))?
            }
            other => {
                return Err(HmxError::config(format!(
                    "unknown hypersurface family '{other}' (hyperplane, sphere, graph)"
                )))
            }
        };
        Ok((chart, cfg.samples.clone()))
    }

    pub fn points_seed(&self) -> u64 {
        self.points
            .as_ref()
            .and_then(|p| p.seed)
            .unwrap_or_else(|| self.master_seed().wrapping_add(1))
    }

    pub fn fixtures_resolved(&self) -> FixturesResolved {
        let f = self.fixtures.clone().unwrap_or(FixturesCfg {
            count: None,
            generic_e: None,
            oblique: None,
            seed: None,
            n: None,
            big_l: None,
            rho: None,
            tau: None,
        });
        FixturesResolved {
            count: f.count.unwrap_or(100),
            generic_e: f.generic_e.unwrap_or(10),
            oblique: f.oblique.unwrap_or(10),
            seed: f
                .seed
                .unwrap_or_else(|| self.master_seed().wrapping_add(101)),
            n: f.n.unwrap_or(4),
            big_l: f.big_l.unwrap_or(2.0),
            rho: f.rho.unwrap_or(0.3),
            tau: f.tau.unwrap_or(2.5),
        }
    }

    pub fn search_resolved(&self) -> (u32, Vec<f64>) {
        let s = self.search.clone().unwrap_or(SearchCfg {
            degree: None,
            rho0_grid: None,
        });
        (
            s.degree.unwrap_or(1),
            s.rho0_grid
                .unwrap_or_else(|| vec![0.05, 0.1, 0.2, 0.5, 1.0]),
        )
    }

    /// Echo of the config with every default materialized.
    pub fn effective(&self, command: &str) -> serde_json::Value {
        let tols = Tols::from_cfg(&self.tolerances);
        let dflt_box = SampleBox::default();
        let points = self.points.clone().unwrap_or(PointsCfg {
            list: None,
            count: None,
            seed: None,
            box_x: None,
            box_y: None,
            min_y_norm: None,
        });
        let points_echo = if let Some(list) = &points.list {
            serde_json::json!({ "list": list })
        } else {
            serde_json::json!({
                "count": points.count.unwrap_or(20),
                "seed": self.points_seed(),
                "box_x": points.box_x.unwrap_or([dflt_box.x_lo, dflt_box.x_hi]),
                "box_y": points.box_y.unwrap_or([dflt_box.y_lo, dflt_box.y_hi]),
                "min_y_norm": points.min_y_norm.unwrap_or(dflt_box.min_y_norm),
            })
        };
        let fixtures_echo = self
            .fixtures
            .as_ref()
            .map(|_| serde_json::to_value(self.fixtures_resolved()).unwrap());
        let search_echo = self.search.as_ref().map(|_| {
            let (degree, grid) = self.search_resolved();
            serde_json::json!({ "degree": degree, "rho0_grid": grid })
        });
        serde_json::json!({
            "command": command,
            "seed": self.master_seed(),
            "space": self.space,
            "hvector": self.hvector,
            "points": points_echo,
            "hypersurface": self.hypersurface,
            "fixtures": fixtures_echo,
            "search": search_echo,
            "tolerances": tols,
            "probes": {
                "optional": self.probe_optional(),
                "parallel_collapse": self.probe_parallel(),
            },
        })
    }

    pub fn probe_optional(&self) -> bool {
        self.probes
            .as_ref()
            .and_then(|p| p.optional)
            .unwrap_or(true)
    }

    pub fn probe_parallel(&self) -> bool {
        self.probes
            .as_ref()
            .and_then(|p| p.parallel_collapse)
            .unwrap_or(true)
    }
}

fn poly_to_expr(p: &Poly) -> Expr {
    let mut acc = Expr::c(0.0);
    for t in &p.terms {
        let mut term = Expr::c(t.coeff);
        for (i, &pw) in t.powers.iter().enumerate() {
            if pw > 0 {
                term = term.mul(Expr::Pow(Box::new(Expr::var(i)), pw));
            }
        }
        acc = acc.add(term);
    }
    acc
}
