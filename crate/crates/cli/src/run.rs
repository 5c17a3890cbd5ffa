//! Command orchestration: each command assembles a [`Report`] from the engine
//! operations; every record carries the residual actually measured and the
//! tolerance it is held against.

use std::collections::BTreeMap;

use hmx_core::error::{HmxError, Result};
use hmx_core::hmatsumoto::{
    barred_fundamentals, difference_tensors, transform_l, v_contractions, ScalarPack,
};
use hmx_core::hvector::{ef_tensors, h_vector_residuals, search_h_vector, SearchSample};
use hmx_core::hypersurface::{
    barred_fundamentals_hs, barred_hypersurface, chart_frame, frame_residuals, fundamentals,
    induced_connections, relative_derivative_check, Kind,
};
use hmx_core::report::{CheckRecord, Report, Status};
use hmx_core::space::homogeneity_suite;
use hmx_core::tensor::{dot, max_abs_vec, rel_gap, sub_vec, t2, Ten2};
use hmx_core::verify::{
    chain_suite, mock_fixture, optional_probes, ChainTols, FixtureParams, Scenario, SyntheticE,
};

use crate::config::{RunConfig, Tols};

/// Known check ids (scenario-parameterized ids use `<scenario>`), with the
/// identity each one verifies.
pub const CHECKS: &[(&str, &str)] = &[
    (
        "frame.values",
        "tensor frame magnitudes at the first point (informational)",
    ),
    ("frame.support_contraction", "l_i y^i equals L"),
    ("frame.angular_annihilates_y", "h_ij y^j vanishes"),
    ("frame.cartan_indicatory", "C_ijk y^k vanishes"),
    ("frame.metric_norm", "g_ij y^i y^j equals L²"),
    (
        "frame.metricity",
        "horizontal covariant derivative of g vanishes",
    ),
    (
        "frame.deflection",
        "F^i_jk y^j equals the nonlinear connection",
    ),
    (
        "frame.torsion_indicatory",
        "P^i_jk annihilates y in both lower slots",
    ),
    ("frame.l_homogeneity", "L is positively 1-homogeneous in y"),
    ("frame.g_homogeneity", "g is 0-homogeneous in y"),
    ("frame.c_homogeneity", "C is (−1)-homogeneous in y"),
    ("hv.eq2", "L ∂̇_j b_i equals ρ₀ h_ij for the weak field"),
    ("hv.m_orthogonal", "m_i y^i vanishes"),
    ("hv.m_norm_nonnegative", "g^{ij} m_i m_j is nonnegative"),
    (
        "hv.ef_reconstruction",
        "E + F reassembles the covariant derivative",
    ),
    ("hv.gradient", "curl-free one-form part gives F = 0"),
    (
        "hv.condition_full",
        "full h-vector condition residual (informational)",
    ),
    (
        "hm.l.closed_vs_direct",
        "transformed support element: closed form vs direct jets",
    ),
    (
        "hm.h.closed_vs_direct",
        "transformed angular metric: closed form vs direct jets",
    ),
    (
        "hm.g.closed_vs_direct",
        "transformed metric: closed form vs direct jets",
    ),
    (
        "hm.c.closed_vs_direct",
        "transformed Cartan tensor: closed form vs direct jets",
    ),
    (
        "hm.lbar.value",
        "transformed length: closed form vs direct jets",
    ),
    (
        "hm.lbar.homogeneity",
        "transformed length is 1-homogeneous in y",
    ),
    (
        "hm.ginv.closed",
        "closed-form transformed inverse metric inverts the metric",
    ),
    (
        "hm.ginv.numeric",
        "numerically inverted transformed metric inverts the metric",
    ),
    (
        "hm.scalars.p_sum",
        "p + p₁ equals τ²/(τ−1)² on the sampled grid",
    ),
    ("hm.scalars.q_product", "q·p equals 1 on the sampled grid"),
    ("hm.scalars.q_vec_y", "Q_r y^r equals p₂ L"),
    (
        "hm.remark.m_contraction",
        "V contracted with m equals its closed form",
    ),
    (
        "hm.remark.raised_contraction",
        "V with one raised index equals its closed form",
    ),
    (
        "hm.parallel.d1",
        "difference vector vanishes for parallel inputs",
    ),
    (
        "hm.parallel.d2",
        "second difference tensor vanishes for parallel inputs",
    ),
    (
        "hm.parallel.d3",
        "connection difference vanishes for parallel inputs",
    ),
    (
        "fixture.<scenario>.condition",
        "exact h-vector condition of the fixture",
    ),
    (
        "fixture.<scenario>.cartan_symmetry",
        "fixture Cartan tensor symmetry and y-contraction",
    ),
    (
        "hm.<scenario>.ginv.closed",
        "fixture transformed inverse metric (closed form)",
    ),
    (
        "hm.<scenario>.ginv.numeric",
        "fixture transformed inverse metric (numeric)",
    ),
    (
        "hm.<scenario>.remark.m_contraction",
        "fixture V·m contraction",
    ),
    (
        "hm.<scenario>.remark.raised_contraction",
        "fixture raised V contraction",
    ),
    (
        "chain.<scenario>.d2.reduced",
        "reduced difference tensor: two routes",
    ),
    (
        "chain.<scenario>.d3.reduced",
        "reduced connection difference: two routes",
    ),
    (
        "chain.<scenario>.d3.projected",
        "normal projection of the connection difference",
    ),
    (
        "chain.<scenario>.cd2.slot_s",
        "Cartan·D collapse, D on the third slot",
    ),
    (
        "chain.<scenario>.cd2.slot_j",
        "Cartan·D collapse, D on the first slot",
    ),
    (
        "chain.<scenario>.cd2.slot_k",
        "Cartan·D collapse, D on the second slot",
    ),
    (
        "chain.<scenario>.cd2.proj.slot_s",
        "projected Cartan·D keeps the tangential-E term",
    ),
    (
        "chain.<scenario>.cd2.proj.slot_j",
        "projected Cartan·D reduces to the v-tensor term",
    ),
    (
        "chain.<scenario>.cd2.proj.slot_k",
        "projected Cartan·D reduces to the v-tensor term",
    ),
    (
        "chain.<scenario>.vd2.slot_s",
        "V·D collapse, D on the third slot",
    ),
    (
        "chain.<scenario>.vd2.slot_j",
        "V·D collapse, D on the first slot",
    ),
    (
        "chain.<scenario>.vd2.slot_k",
        "V·D collapse, D on the second slot",
    ),
    (
        "chain.<scenario>.vd2.proj.slot_s",
        "projected V·D keeps the tangential-E term",
    ),
    ("chain.<scenario>.vd2.proj.slot_j", "projected V·D vanishes"),
    ("chain.<scenario>.vd2.proj.slot_k", "projected V·D vanishes"),
    (
        "chain.<scenario>.d3.proj.collapsed",
        "projected difference equals the bracket form",
    ),
    (
        "chain.<scenario>.d3.proj.tangential_e",
        "tangential-E collapse of the projection",
    ),
    (
        "chain.<scenario>.barred.second_fundamental",
        "barred second-fundamental relation",
    ),
    (
        "chain.<scenario>.barred.v_tensor_scaling",
        "barred v-tensor scales by √p",
    ),
    (
        "hs.frame.orthonormality",
        "unit normal solves the orthogonality system",
    ),
    (
        "hs.frame.duality",
        "projection factors and inverses are dual",
    ),
    (
        "hs.frame.completeness",
        "tangential plus normal projectors give the identity",
    ),
    ("hs.frame.y_normal", "the supporting element is tangent"),
    (
        "hs.frame.angular",
        "angular metric relations along the hypersurface",
    ),
    (
        "hs.fund.values",
        "hypersurface fundamental magnitudes (informational)",
    ),
    (
        "hs.fund.contraction_first",
        "v-contraction of the second fundamental h-tensor",
    ),
    (
        "hs.fund.contraction_second",
        "v-contraction with the normal curvature correction",
    ),
    (
        "hs.classification",
        "hyperplane kind with its deciding residuals",
    ),
    (
        "hs.rel_deriv.h_tangent",
        "relative h-derivative of the projection factors",
    ),
    (
        "hs.rel_deriv.v_tangent",
        "relative v-derivative of the projection factors",
    ),
    (
        "hs.rel_deriv.h_normal",
        "relative h-derivative of the normal",
    ),
    (
        "hs.rel_deriv.v_normal",
        "relative v-derivative of the normal",
    ),
    (
        "hs.barred.orthonormality",
        "scaled normal is unit and orthogonal in the transformed metric",
    ),
    (
        "hs.barred.conormal",
        "two routes to the barred conormal agree",
    ),
    ("hs.barred.duality", "barred projection pair is dual"),
    (
        "hs.barred.normal_norm",
        "transformed norm of the base normal matches its closed form",
    ),
    (
        "hs.barred.oblique",
        "oblique contraction identity of the transformed metric",
    ),
    (
        "hs.barred.tangency",
        "tangency of the h-vector along the chart (informational)",
    ),
    (
        "hs.barred.h0_scaling",
        "barred normal curvature scales by √p (gradient tangent case)",
    ),
    (
        "hs.barred.m_scaling",
        "barred v-tensor scales by √p via two routes",
    ),
    (
        "hs.barred.second_fundamental",
        "barred second-fundamental relation on the chart",
    ),
    (
        "hs.induced.torsion_reconstruction",
        "completeness reconstruction of the projected torsion",
    ),
    (
        "hs.induced.berwald_reconstruction",
        "completeness reconstruction of the projected Berwald data",
    ),
    (
        "hs.induced.parallel.torsion_equality",
        "induced torsion agrees across the change (parallel inputs)",
    ),
    (
        "hs.induced.parallel.berwald_equality",
        "induced Berwald data agrees across the change (parallel inputs)",
    ),
    (
        "search.best_residual",
        "least-squares existence probe (informational)",
    ),
    (
        "probe.one_form_cartan",
        "one-form/Cartan contraction probe (informational)",
    ),
    (
        "probe.connection_gap",
        "transformed-connection gap probe (informational)",
    ),
];

pub fn list_checks() -> String {
    let w = CHECKS.iter().map(|(id, _)| id.len()).max().unwrap_or(8);
    let mut out = String::new();
    for (id, desc) in CHECKS {
        out.push_str(&format!("{id:<w$}  {desc}\n"));
    }
    out
}

pub fn run(command: &str, cfg: &RunConfig) -> Result<Report> {
    let mut report = Report::new(command, cfg.master_seed(), cfg.effective(command));
    let tols = Tols::from_cfg(&cfg.tolerances);
    match command {
        "frame" => cmd_frame(cfg, &tols, &mut report)?,
        "transform" => cmd_transform(cfg, &tols, &mut report, false)?,
        "verify-core" => cmd_transform(cfg, &tols, &mut report, true)?,
        "verify-chain" => cmd_verify_chain(cfg, &tols, &mut report)?,
        "hypersurface" => cmd_hypersurface(cfg, &tols, &mut report)?,
        "search-hvector" => cmd_search(cfg, &mut report)?,
        other => return Err(HmxError::config(format!("unknown command '{other}'"))),
    }
    report.normalize();
    Ok(report)
}

/// Collapses per-point records with the same id into one record holding the
/// worst residual; a skipped record survives only if nothing ran.
fn aggregate(records: Vec<CheckRecord>) -> Vec<CheckRecord> {
    let mut grouped: BTreeMap<String, Vec<CheckRecord>> = BTreeMap::new();
    for r in records {
        grouped.entry(r.check_id.clone()).or_default().push(r);
    }
    let mut out = Vec::new();
    for (_, group) in grouped {
        let ran: Vec<&CheckRecord> = group
            .iter()
            .filter(|r| r.status != Status::SkippedPrecondition)
            .collect();
        let skipped = group.len() - ran.len();
        if ran.is_empty() {
            let mut rec = group[0].clone();
            rec.note = Some(format!(
                "skipped at all {} evaluation points: {}",
                group.len(),
                rec.note.unwrap_or_default()
            ));
            out.push(rec);
            continue;
        }
        let exploratory = ran.iter().all(|r| r.status == Status::Exploratory);
        let worst = ran
            .iter()
            .max_by(|a, b| a.residual.partial_cmp(&b.residual).unwrap())
            .unwrap();
        let mut rec = (*worst).clone();
        if !exploratory {
            rec.status = if rec.residual.is_finite() && rec.residual <= rec.tolerance {
                Status::Pass
            } else {
                Status::Fail
            };
        }
        let mut note = format!("worst of {} evaluation(s)", ran.len());
        if skipped > 0 {
            note.push_str(&format!(", {skipped} skipped: precondition"));
        }
        if let Some(prev) = &rec.note {
            note.push_str("; ");
            note.push_str(prev);
        }
        rec.note = Some(note);
        out.push(rec);
    }
    out
}

fn cmd_frame(cfg: &RunConfig, tols: &Tols, report: &mut Report) -> Result<()> {
    let space = cfg.space()?;
    let points = cfg.points()?;
    let mut recs = Vec::new();
    // tensor values at the first point, for the record
    if let Some(p0) = points.first() {
        let f = space.frame(p0)?;
        recs.push(
            CheckRecord::exploratory(
                "frame.values",
                "tensor frame magnitudes at the first evaluation point",
                f.met.big_l,
            )
            .with_note(format!(
                "L={}; |g|={}, |C|={}, |G^i|={}, |F|={}, |P|={} at x={:?}, y={:?}",
                hmx_core::report::fmt_f64(f.met.big_l),
                hmx_core::report::fmt_f64(f.met.g.max_abs()),
                hmx_core::report::fmt_f64(f.met.cartan.max_abs()),
                hmx_core::report::fmt_f64(max_abs_vec(&f.con.spray)),
                hmx_core::report::fmt_f64(f.con.cartan_h.max_abs()),
                hmx_core::report::fmt_f64(f.con.hv_torsion.max_abs()),
                p0.x,
                p0.y
            )),
        );
    }
    for p in &points {
        let r = homogeneity_suite(&space, p)?;
        recs.push(CheckRecord::graded(
            "frame.support_contraction",
            "l_i y^i equals L",
            r.ly_minus_l,
            tols.frame,
        ));
        recs.push(CheckRecord::graded(
            "frame.angular_annihilates_y",
            "h_ij y^j vanishes",
            r.hy,
            tols.frame,
        ));
        recs.push(CheckRecord::graded(
            "frame.cartan_indicatory",
            "C_ijk y^k vanishes",
            r.cy,
            tols.frame,
        ));
        recs.push(CheckRecord::graded(
            "frame.metric_norm",
            "g_ij y^i y^j equals L²",
            r.gyy_minus_l2,
            tols.frame,
        ));
        recs.push(CheckRecord::graded(
            "frame.metricity",
            "g_{ij|k} vanishes",
            r.metricity,
            tols.frame,
        ));
        recs.push(CheckRecord::graded(
            "frame.deflection",
            "F^i_jk y^j equals the nonlinear connection",
            r.deflection,
            tols.frame,
        ));
        recs.push(CheckRecord::graded(
            "frame.torsion_indicatory",
            "P^i_jk annihilates y",
            r.torsion_y,
            tols.frame,
        ));
        recs.push(CheckRecord::graded(
            "frame.l_homogeneity",
            "L(x, λy) = λ L(x, y)",
            r.l_homogeneity,
            tols.l_homogeneity,
        ));
        recs.push(CheckRecord::graded(
            "frame.g_homogeneity",
            "g is 0-homogeneous in y",
            r.g_homogeneity,
            tols.frame,
        ));
        recs.push(CheckRecord::graded(
            "frame.c_homogeneity",
            "C is (−1)-homogeneous in y",
            r.c_homogeneity,
            tols.frame,
        ));
    }
    report.extend(aggregate(recs));
    Ok(())
}

/// `transform` emits the closed-vs-direct gaps; `verify-core` widens this to
/// the full per-section identity suite.
fn cmd_transform(cfg: &RunConfig, tols: &Tols, report: &mut Report, full: bool) -> Result<()> {
    let space = cfg.space()?;
    let field = cfg.hvector()?;
    let points = cfg.points()?;
    let transformed = space.transformed(&field);
    let mut recs = Vec::new();

    // is the one-form part curl-free? (exact polynomial derivatives)
    let n = space.dim;
    let mut curl_free = true;
    for i in 0..n {
        for j in 0..n {
            let dji = field.c[j].derivative(i);
            let dij = field.c[i].derivative(j);
            let diff: f64 = dji
                .terms
                .iter()
                .map(|t| t.coeff.abs())
                .chain(dij.terms.iter().map(|t| t.coeff.abs()))
                .sum::<f64>();
            let probe = [0.37, -0.51, 0.23, 0.11, -0.29, 0.41];
            if diff > 0.0 && (dji.eval(&probe[..n]) - dij.eval(&probe[..n])).abs() > 1e-14 {
                curl_free = false;
            }
        }
    }

    for p in &points {
        let frame = space.frame(p)?;
        let hvd = ef_tensors(&field, &frame)?;
        let pack = ScalarPack::from_view(&frame.met.view(), &hvd)?;
        let barred = barred_fundamentals(&frame.met.view(), &pack)?;
        let direct = transformed.metric_tensors(p)?;

        let (l_bar, _, _, _) = transform_l(&frame.met.view(), &hvd)?;
        recs.push(CheckRecord::graded(
            "hm.lbar.value",
            "transformed length: closed form vs direct jets",
            rel_gap((l_bar - direct.big_l).abs(), direct.big_l.abs()),
            tols.transform_rel,
        ));
        recs.push(CheckRecord::graded(
            "hm.l.closed_vs_direct",
            "transformed support element: closed form vs direct jets",
            rel_gap(
                max_abs_vec(&sub_vec(&barred.l_bar_i, &direct.l)),
                max_abs_vec(&direct.l),
            ),
            tols.transform_rel,
        ));
        recs.push(CheckRecord::graded(
            "hm.h.closed_vs_direct",
            "transformed angular metric: closed form vs direct jets",
            rel_gap(barred.h_bar.sub(&direct.h).max_abs(), direct.h.max_abs()),
            tols.transform_rel,
        ));
        recs.push(CheckRecord::graded(
            "hm.g.closed_vs_direct",
            "transformed metric: closed form vs direct jets",
            rel_gap(barred.g_bar.sub(&direct.g).max_abs(), direct.g.max_abs()),
            tols.transform_rel,
        ));
        recs.push(CheckRecord::graded(
            "hm.c.closed_vs_direct",
            "transformed Cartan tensor: closed form vs direct jets",
            rel_gap(
                barred.c_bar.sub(&direct.cartan).max_abs(),
                direct.cartan.max_abs(),
            ),
            tols.transform_rel,
        ));
        for (route, ginv) in [
            ("closed", &barred.g_bar_inv),
            ("numeric", &barred.g_bar_inv_numeric),
        ] {
            recs.push(CheckRecord::graded(
                &format!("hm.ginv.{route}"),
                "transformed inverse metric times transformed metric is the identity",
                ginv.matmul(&barred.g_bar).sub(&Ten2::identity(n)).max_abs(),
                tols.ginv,
            ));
        }
        // homogeneity of the transformed length
        let mut worst: f64 = 0.0;
        for lambda in [0.5, 2.0, 3.0] {
            let ps = p.rescaled(lambda);
            let lv = transformed.l_value(&ps.x, &ps.y)?;
            worst = worst.max((lv - lambda * direct.big_l).abs() / (lambda * direct.big_l));
        }
        recs.push(CheckRecord::graded(
            "hm.lbar.homogeneity",
            "transformed length is 1-homogeneous in y",
            worst,
            tols.l_homogeneity,
        ));
        recs.push(CheckRecord::graded(
            "hm.scalars.q_vec_y",
            "Q_r y^r equals p₂ L",
            (dot(&pack.q_vec, &p.y) - pack.p2 * frame.met.big_l).abs() / pack.p2.abs().max(1.0),
            tols.scalars.max(1e-10),
        ));

        if full {
            let hr = h_vector_residuals(&field, &frame, &hvd)?;
            recs.push(CheckRecord::graded(
                "hv.eq2",
                "L ∂̇_j b_i equals ρ₀ h_ij for the weak field",
                hr.eq2,
                tols.eq2,
            ));
            recs.push(
                CheckRecord::exploratory(
                    "hv.condition_full",
                    "full h-vector condition residual (weak fields do not satisfy it)",
                    hr.cond_ii,
                )
                .with_note("expected nonzero on real metrics; fixtures satisfy it exactly"),
            );
            if curl_free {
                recs.push(CheckRecord::graded(
                    "hv.gradient",
                    "curl-free one-form part gives F = 0",
                    hr.gradient,
                    tols.eq2,
                ));
            } else {
                recs.push(CheckRecord::exploratory(
                    "hv.gradient",
                    "curl of the one-form part (field is not gradient)",
                    hr.gradient,
                ));
            }
            recs.push(CheckRecord::graded(
                "hv.m_orthogonal",
                "m_i y^i vanishes",
                dot(&hvd.m, &p.y).abs(),
                1e-10,
            ));
            recs.push(CheckRecord::graded(
                "hv.m_norm_nonnegative",
                "g^{ij} m_i m_j is nonnegative",
                (-hvd.m2).max(0.0),
                1e-12,
            ));
            let ef = t2(n, |i, j| {
                hvd.e.get(i, j) + hvd.f.get(i, j) - hvd.b_cov.get(i, j)
            });
            recs.push(CheckRecord::graded(
                "hv.ef_reconstruction",
                "E + F reassembles the covariant derivative",
                ef.max_abs(),
                tols.ef_reconstruction,
            ));
            let vc = v_contractions(&frame.met.view(), &pack, &barred.v);
            recs.push(CheckRecord::graded(
                "hm.remark.m_contraction",
                "V contracted with m equals its closed form",
                vc.residual_m,
                tols.remark,
            ));
            recs.push(CheckRecord::graded(
                "hm.remark.raised_contraction",
                "V with one raised index equals its closed form",
                vc.residual_raised,
                tols.remark,
            ));
            if cfg.probe_parallel() {
                let injected = hvd.clone().with_injected(
                    Ten2::zeros(n),
                    Ten2::zeros(n),
                    &frame.met.g_inv,
                    &p.y,
                );
                let diff = difference_tensors(
                    &frame.met.view(),
                    &injected,
                    &pack,
                    &barred,
                    &frame.con.cartan_h,
                );
                recs.push(CheckRecord::graded(
                    "hm.parallel.d1",
                    "difference vector vanishes for parallel inputs",
                    max_abs_vec(&diff.d1),
                    tols.parallel,
                ));
                recs.push(CheckRecord::graded(
                    "hm.parallel.d2",
                    "second difference tensor vanishes for parallel inputs",
                    diff.d2.max_abs(),
                    tols.parallel,
                ));
                recs.push(CheckRecord::graded(
                    "hm.parallel.d3",
                    "connection difference vanishes for parallel inputs",
                    diff.d3.max_abs(),
                    tols.parallel,
                ));
            }
        }
    }

    if full {
        // scalar identities over the (τ, ρ) grid — independent of the points
        let mut p_sum: f64 = 0.0;
        let mut q_prod: f64 = 0.0;
        for tau in [1.5, 2.0, 3.0, 5.0, 7.5, 10.0] {
            for rho in [-1.0, -0.5, -0.1, 0.05, 0.4, 1.0] {
                for m2 in [0.0f64, 0.3, 1.1] {
                    let (l, beta) = (2.3, 2.3 / tau);
                    let mut lvec = vec![0.0; 3];
                    lvec[0] = 1.0;
                    let mut mvec = vec![0.0; 3];
                    mvec[1] = m2.sqrt();
                    let h = t2(3, |i, j| if i == j && i > 0 { 1.0 } else { 0.0 });
                    let pack = ScalarPack::build(
                        l,
                        rho,
                        tau,
                        beta,
                        &lvec,
                        &lvec.clone(),
                        &mvec,
                        &mvec.clone(),
                        m2,
                        &h,
                    )?;
                    let e = tau - 1.0;
                    p_sum = p_sum.max(
                        (pack.p + pack.p1 - tau * tau / (e * e)).abs() / (pack.p.abs().max(1.0)),
                    );
                    q_prod = q_prod.max((pack.q * pack.p - 1.0).abs());
                }
            }
        }
        let mut recs2 = vec![
            CheckRecord::graded(
                "hm.scalars.p_sum",
                "p + p₁ equals τ²/(τ−1)² across the τ, ρ grid",
                p_sum,
                tols.scalars,
            ),
            CheckRecord::graded(
                "hm.scalars.q_product",
                "q·p equals 1 across the τ, ρ grid",
                q_prod,
                tols.scalars,
            ),
        ];
        if cfg.probe_optional() {
            recs2.extend(optional_probes(&space, &field, &points)?);
        }
        recs.extend(recs2);
    }

    report.extend(aggregate(recs));
    Ok(())
}

fn cmd_verify_chain(cfg: &RunConfig, tols: &Tols, report: &mut Report) -> Result<()> {
    let fx = cfg.fixtures_resolved();
    let base_seed = fx.seed;
    let count = fx.count;
    let generic_e = fx.generic_e;
    let oblique = fx.oblique;
    let chain_tols = ChainTols {
        cond_ii: tols.fixture_condition,
        remark: tols.remark,
        ginv: tols.ginv,
        chain: tols.chain,
        gate: tols.gate,
    };
    let params = |seed: u64| FixtureParams {
        n: fx.n,
        big_l: fx.big_l,
        rho: fx.rho,
        tau: fx.tau,
        seed,
    };
    let mut recs = Vec::new();
    for k in 0..count {
        let seed = base_seed.wrapping_add(k as u64);
        let fix = mock_fixture(&params(seed), true)?;
        let e = SyntheticE::draw(&fix, seed, true);
        recs.extend(chain_suite(
            &fix,
            &e,
            Scenario::GradientTangent,
            &chain_tols,
            seed,
        )?);
    }
    for k in 0..generic_e {
        let seed = base_seed.wrapping_add(10_000 + k as u64);
        let fix = mock_fixture(&params(seed), true)?;
        let e = SyntheticE::draw(&fix, seed, false);
        recs.extend(chain_suite(
            &fix,
            &e,
            Scenario::GenericE,
            &chain_tols,
            seed,
        )?);
    }
    for k in 0..oblique {
        let seed = base_seed.wrapping_add(20_000 + k as u64);
        let fix = mock_fixture(&params(seed), false)?;
        let e = SyntheticE::draw(&fix, seed, false);
        recs.extend(chain_suite(&fix, &e, Scenario::Oblique, &chain_tols, seed)?);
    }
    report.extend(aggregate(recs));
    Ok(())
}

fn cmd_hypersurface(cfg: &RunConfig, tols: &Tols, report: &mut Report) -> Result<()> {
    let space = cfg.space()?;
    let field = cfg.hvector().ok();
    let (chart, samples) = cfg.chart()?;
    let mut recs = Vec::new();
    for s in &samples {
        let cf = chart_frame(&space, &chart, &s.u, &s.v)?;
        let fr = frame_residuals(&cf);
        recs.push(CheckRecord::graded(
            "hs.frame.orthonormality",
            "unit normal solves the orthogonality system",
            fr.orthonormality,
            tols.hs_frame,
        ));
        recs.push(CheckRecord::graded(
            "hs.frame.duality",
            "projection factors and inverses are dual",
            fr.duality,
            tols.hs_frame,
        ));
        recs.push(CheckRecord::graded(
            "hs.frame.completeness",
            "tangential plus normal projectors give the identity",
            fr.completeness,
            tols.hs_frame,
        ));
        recs.push(CheckRecord::graded(
            "hs.frame.y_normal",
            "the supporting element is tangent",
            fr.y_normal,
            tols.hs_frame,
        ));
        recs.push(CheckRecord::graded(
            "hs.frame.angular",
            "angular metric relations along the hypersurface",
            fr.angular,
            tols.hs_frame,
        ));

        let fund = fundamentals(&cf, tols.eps_cls);
        recs.push(
            CheckRecord::exploratory(
                "hs.fund.values",
                "fundamental magnitudes of the hypersurface at this sample",
                fund.h0,
            )
            .with_note(format!(
                "H_0={}; |H_a|={}, |H_ab|={}, |M_a|={}, |M_ab|={} at u={:?}, v={:?}",
                hmx_core::report::fmt_f64(fund.h0),
                hmx_core::report::fmt_f64(max_abs_vec(&fund.h_a)),
                hmx_core::report::fmt_f64(fund.h_ab.max_abs()),
                hmx_core::report::fmt_f64(max_abs_vec(&fund.m_a)),
                hmx_core::report::fmt_f64(fund.m_ab.max_abs()),
                s.u,
                s.v
            )),
        );
        recs.push(CheckRecord::graded(
            "hs.fund.contraction_first",
            "v-contraction of the second fundamental h-tensor",
            fund.contraction_residuals.0,
            tols.hs_contraction,
        ));
        recs.push(CheckRecord::graded(
            "hs.fund.contraction_second",
            "v-contraction with the normal curvature correction",
            fund.contraction_residuals.1,
            tols.hs_contraction,
        ));
        let kind = match fund.kind {
            Kind::None => "none",
            Kind::First => "first",
            Kind::Second => "second",
            Kind::Third => "third",
        };
        recs.push(
            CheckRecord::exploratory(
                "hs.classification",
                "hyperplane kind with its deciding residuals",
                fund.residuals.0.max(fund.residuals.1).max(fund.residuals.2),
            )
            .with_note(format!(
                "kind={kind}; residuals: normal_curvature={}, h_tensor={}, v_tensor={}; eps={}",
                hmx_core::report::fmt_f64(fund.residuals.0),
                hmx_core::report::fmt_f64(fund.residuals.1),
                hmx_core::report::fmt_f64(fund.residuals.2),
                hmx_core::report::fmt_f64(fund.eps_cls),
            )),
        );

        let rd = relative_derivative_check(&space, &chart, &cf, &fund, 1e-5)?;
        recs.push(CheckRecord::graded(
            "hs.rel_deriv.h_tangent",
            "relative h-derivative of the projection factors",
            rd.h_tangent,
            tols.rel_deriv,
        ));
        recs.push(CheckRecord::graded(
            "hs.rel_deriv.v_tangent",
            "relative v-derivative of the projection factors",
            rd.v_tangent,
            tols.rel_deriv,
        ));
        recs.push(CheckRecord::graded(
            "hs.rel_deriv.h_normal",
            "relative h-derivative of the normal",
            rd.h_normal,
            tols.rel_deriv,
        ));
        recs.push(CheckRecord::graded(
            "hs.rel_deriv.v_normal",
            "relative v-derivative of the normal",
            rd.v_normal,
            tols.rel_deriv,
        ));

        let Some(field) = &field else { continue };
        let hvd = ef_tensors(field, &cf.frame)?;
        let pack = ScalarPack::from_view(&cf.frame.met.view(), &hvd)?;
        let barred = barred_fundamentals(&cf.frame.met.view(), &pack)?;
        let bch = barred_hypersurface(&cf, &hvd, &pack, &barred, tols.tangency)?;
        recs.push(
            CheckRecord::exploratory(
                "hs.barred.tangency",
                "tangency of the h-vector along the chart",
                bch.tangency_residual,
            )
            .with_note(if bch.tangent {
                "tangent"
            } else {
                "not tangent"
            }),
        );
        recs.push(CheckRecord::graded(
            "hs.barred.oblique",
            "oblique contraction identity of the transformed metric",
            bch.oblique_identity,
            tols.hs_barred,
        ));
        recs.push(CheckRecord::graded(
            "hs.barred.normal_norm",
            "transformed norm of the base normal matches its closed form",
            bch.normal_norm_identity,
            tols.hs_barred,
        ));
        if bch.tangent {
            recs.push(CheckRecord::graded(
                "hs.barred.orthonormality",
                "scaled normal is unit and orthogonal in the transformed metric",
                bch.orthonormality,
                tols.hs_barred,
            ));
            recs.push(CheckRecord::graded(
                "hs.barred.conormal",
                "two routes to the barred conormal agree",
                bch.conormal_gap,
                tols.hs_barred,
            ));
            recs.push(CheckRecord::graded(
                "hs.barred.duality",
                "barred projection pair is dual",
                bch.duality,
                tols.hs_barred,
            ));
        } else {
            for (id, reference) in [
                (
                    "hs.barred.orthonormality",
                    "scaled normal is unit and orthogonal in the transformed metric",
                ),
                (
                    "hs.barred.conormal",
                    "two routes to the barred conormal agree",
                ),
                ("hs.barred.duality", "barred projection pair is dual"),
            ] {
                recs.push(CheckRecord::skipped(
                    id,
                    reference,
                    tols.hs_barred,
                    &format!("b not tangent (|b·B| = {:.3e})", bch.tangency_residual),
                ));
            }
        }

        let gradient = hvd.f.max_abs() <= tols.gate && max_abs_vec(&hvd.rho_k) <= tols.gate;
        let diff = difference_tensors(
            &cf.frame.met.view(),
            &hvd,
            &pack,
            &barred,
            &cf.frame.con.cartan_h,
        );
        if bch.tangent && gradient {
            let bf = barred_fundamentals_hs(&cf, &fund, &hvd, &pack, &barred, &diff, &bch);
            recs.push(CheckRecord::graded(
                "hs.barred.h0_scaling",
                "barred normal curvature scales by √p (gradient tangent case)",
                bf.h0_scaling_gap,
                tols.hs_barred,
            ));
            recs.push(CheckRecord::graded(
                "hs.barred.m_scaling",
                "barred v-tensor scales by √p via two routes",
                bf.m_scaling_gap,
                tols.hs_barred,
            ));
            // the collapsed second-fundamental relation additionally needs the
            // full h-vector condition and a tangential E
            let hr = h_vector_residuals(field, &cf.frame, &hvd)?;
            let e_gate = dot(&hvd.ej0, &cf.normal_up).abs();
            if hr.cond_ii <= tols.gate && e_gate <= tols.gate {
                recs.push(CheckRecord::graded(
                    "hs.barred.second_fundamental",
                    "barred second-fundamental relation on the chart",
                    bf.second_fundamental_gap,
                    tols.hs_barred,
                ));
            } else {
                recs.push(CheckRecord::skipped(
                    "hs.barred.second_fundamental",
                    "barred second-fundamental relation on the chart",
                    tols.hs_barred,
                    &format!(
                        "needs the full h-vector condition (residual {:.3e}) and tangential E (E·B = {:.3e})",
                        hr.cond_ii, e_gate
                    ),
                ));
            }
        } else {
            let why = if !bch.tangent {
                "b not tangent"
            } else {
                "field is not gradient"
            };
            for (id, reference) in [
                (
                    "hs.barred.h0_scaling",
                    "barred normal curvature scales by √p",
                ),
                (
                    "hs.barred.m_scaling",
                    "barred v-tensor scales by √p via two routes",
                ),
                (
                    "hs.barred.second_fundamental",
                    "barred second-fundamental relation on the chart",
                ),
            ] {
                recs.push(CheckRecord::skipped(id, reference, tols.hs_barred, why));
            }
        }

        // induced connections; the barred equalities run under injected
        // parallel inputs on first-kind charts
        let first_kind = max_abs_vec(&fund.h_a) <= tols.eps_cls;
        let ic = induced_connections(&cf, &bch, &cf.frame.con.hv_torsion, &cf.frame.con.berwald);
        recs.push(CheckRecord::graded(
            "hs.induced.torsion_reconstruction",
            "completeness reconstruction of the projected torsion",
            ic.torsion_reconstruction,
            tols.induced_reconstruction,
        ));
        recs.push(CheckRecord::graded(
            "hs.induced.berwald_reconstruction",
            "completeness reconstruction of the projected Berwald data",
            ic.berwald_reconstruction,
            tols.induced_reconstruction,
        ));
        if cfg.probe_parallel() {
            if first_kind && bch.tangent {
                // parallel mechanism: zero derivative inputs collapse every
                // difference tensor, so the transformed tensors to project
                // are the base ones
                let injected = hvd.clone().with_injected(
                    Ten2::zeros(space.dim),
                    Ten2::zeros(space.dim),
                    &cf.frame.met.g_inv,
                    &cf.point.y,
                );
                let dz = difference_tensors(
                    &cf.frame.met.view(),
                    &injected,
                    &pack,
                    &barred,
                    &cf.frame.con.cartan_h,
                );
                // D = 0 exactly, so the transformed tensors equal the base ones
                let zero_gap = dz.d3.max_abs();
                let ic2 =
                    induced_connections(&cf, &bch, &cf.frame.con.hv_torsion, &cf.frame.con.berwald);
                recs.push(CheckRecord::graded(
                    "hs.induced.parallel.torsion_equality",
                    "induced torsion agrees across the change (parallel inputs)",
                    ic2.torsion_equality.max(zero_gap),
                    tols.induced_equality,
                ));
                recs.push(CheckRecord::graded(
                    "hs.induced.parallel.berwald_equality",
                    "induced Berwald data agrees across the change (parallel inputs)",
                    ic2.berwald_equality.max(zero_gap),
                    tols.induced_equality,
                ));
            } else {
                let why = if !first_kind {
                    "chart is not first kind at this sample"
                } else {
                    "b not tangent"
                };
                for (id, reference) in [
                    (
                        "hs.induced.parallel.torsion_equality",
                        "induced torsion agrees across the change",
                    ),
                    (
                        "hs.induced.parallel.berwald_equality",
                        "induced Berwald data agrees across the change",
                    ),
                ] {
                    recs.push(CheckRecord::skipped(
                        id,
                        reference,
                        tols.induced_equality,
                        why,
                    ));
                }
            }
        }
    }
    report.extend(aggregate(recs));
    Ok(())
}

fn cmd_search(cfg: &RunConfig, report: &mut Report) -> Result<()> {
    let space = cfg.space()?;
    let points = cfg.points()?;
    let (degree, grid) = cfg.search_resolved();
    let samples: Vec<SearchSample> = points
        .iter()
        .map(|p| SearchSample::from_space(&space, p))
        .collect::<Result<_>>()?;
    let out = search_h_vector(&samples, degree, &grid)?;
    let curve: Vec<String> = out
        .residual_curve
        .iter()
        .map(|(r, v)| {
            format!(
                "rho0={} rms={}",
                hmx_core::report::fmt_f64(*r),
                hmx_core::report::fmt_f64(*v)
            )
        })
        .collect();
    report.push(
        CheckRecord::exploratory(
            "search.best_residual",
            "least-squares existence probe for the full h-vector condition",
            out.best_residual,
        )
        .with_note(format!(
            "best rho0={} over {} samples, ansatz degree {degree}; curve: {}",
            hmx_core::report::fmt_f64(out.best_rho0),
            out.samples,
            curve.join("; ")
        )),
    );
    Ok(())
}
