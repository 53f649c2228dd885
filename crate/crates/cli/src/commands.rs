use rayon::prelude::*;

use muband_core::assembly::glue::{
    assemble, certificate_from_samples, condition_samples, default_epsilon_on_grid, ConditionCertificate,
    EpsilonAttempt,
};
use muband_core::assembly::{smooth_potential, BandPotential, SmoothingSide};
use muband_core::bubble::stability::{first_variation_2d, stability_1d, stability_2d};
use muband_core::bubble::{minimize_1d, minimize_2d, planar::stencil_curvatures, GridBand};
use muband_core::comparison::{
    check_hypotheses, classical_bound, ell_negative, ell_nonneg, PB_NOTE,
};
use muband_core::model_spaces::ModelSpace;
use muband_core::Error;

use crate::error::{CliError, CliResult};
use crate::report::{Aggregate, Report, Table};
use crate::scenario::Scenario;

pub const EXIT_OK: i32 = 0;
pub const EXIT_HYPOTHESIS: i32 = 2;
pub const EXIT_CONTRADICTION: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FamilyArg {
    Spherical,
    Cone,
    Hyperbolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SideArg {
    Both,
    LeftOnly,
    RightOnly,
    Neither,
}

impl From<SideArg> for SmoothingSide {
    fn from(s: SideArg) -> Self {
        match s {
            SideArg::Both => SmoothingSide::Both,
            SideArg::LeftOnly => SmoothingSide::LeftOnly,
            SideArg::RightOnly => SmoothingSide::RightOnly,
            SideArg::Neither => SmoothingSide::Neither,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelRequest {
    pub family: FamilyArg,
    pub n: usize,
    pub kappa: Option<f64>,
    pub sigma: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
}

impl ModelRequest {
    pub fn build(&self) -> CliResult<ModelSpace> {
        let missing = |what: &str| CliError::Parse(format!("--{what} is required for this family"));
        Ok(match self.family {
            FamilyArg::Spherical => {
                let kappa = self.kappa.ok_or_else(|| missing("kappa"))?;
                let half = 0.9 * std::f64::consts::PI / (kappa.sqrt() * self.n as f64);
                ModelSpace::spherical(self.n, kappa, self.a.unwrap_or(-half), self.b.unwrap_or(half))?
            }
            FamilyArg::Cone => ModelSpace::cone(self.n, self.a.unwrap_or(0.5), self.b.unwrap_or(2.0))?,
            FamilyArg::Hyperbolic => ModelSpace::hyperbolic(
                self.n,
                self.sigma.ok_or_else(|| missing("sigma"))?,
                self.a.unwrap_or(0.5),
                self.b.unwrap_or(2.0),
            )?,
        })
    }
}

fn family_label(ms: &ModelSpace) -> String {
    let name = ms.warping().family().name();
    if ms.warping().is_reflected() {
        format!("{name}-reflected")
    } else {
        name.to_string()
    }
}

/// Tabulates φ, h and scal of one model over a grid.
pub fn run_model(req: &ModelRequest, grid: usize) -> CliResult<Report> {
    let ms = req.build()?;
    let nf = ms.dimension() as f64;
    let mut t = Table::new("model.csv", &["t", "phi", "dphi", "ddphi", "h", "dh", "scal", "scal_warp"]);
    for x in ms.domain().grid(grid) {
        let (phi, dphi, ddphi) = ms.warping_at(x)?;
        let h = ms.potential_of(x)?;
        let dh = ms.potential_slope_of(x)?;
        let scal = ms.scalar_curvature_of(x)?;
        let scal_warp = -2.0 * (nf - 1.0) * ddphi / phi - (nf - 1.0) * (nf - 2.0) * (dphi / phi).powi(2);
        t.push(vec![x.into(), phi.into(), dphi.into(), ddphi.into(), h.into(), dh.into(), scal.into(), scal_warp.into()]);
    }
    let mut r = Report::new("model");
    r.text("family", family_label(&ms));
    r.text("n", ms.dimension());
    r.add_table(t);
    let (hm, hp) = ms.boundary_mean_curvatures();
    r.scalar("width", ms.width_of());
    r.scalar("h_minus", hm);
    r.scalar("h_plus", hp);
    r.derived("scal_min", Aggregate::Min, "model.csv", "scal")?;
    r.derived("scal_max", Aggregate::Max, "model.csv", "scal")?;
    r.derived("h_left", Aggregate::First, "model.csv", "h")?;
    r.derived("h_right", Aggregate::Last, "model.csv", "h")?;
    r.derived("grid_points", Aggregate::Count, "model.csv", "t")?;
    Ok(r)
}

/// Smoothed potential of one model.
pub fn run_smoothed(req: &ModelRequest, eps: f64, side: SideArg, grid: usize) -> CliResult<Report> {
    let ms = req.build()?;
    let s = smooth_potential(&ms, eps, side.into())?;
    let nf = ms.dimension() as f64;
    let mut t = Table::new("smoothed.csv", &["t", "rho", "drho", "h_hat", "dh_hat", "margin", "predicted_margin"]);
    for x in s.domain().grid(grid) {
        let (rho, drho) = s.cutoff().eval(x);
        let (h, dh) = s.eval(x);
        let margin = s.sigma() - (-nf / (nf - 1.0) * h * h - 2.0 * dh);
        t.push(vec![x.into(), rho.into(), drho.into(), h.into(), dh.into(), margin.into(), s.predicted_margin(x).into()]);
    }
    let cert = s.certify(grid);
    let mut r = Report::new("potential");
    r.text("family", family_label(&ms));
    r.text("certificate", if cert.passed { "passed" } else { "failed" });
    r.add_table(t);
    r.scalar("eps", eps);
    r.scalar("sigma", s.sigma());
    r.derived("max_slope", Aggregate::Max, "smoothed.csv", "dh_hat")?;
    r.derived("min_margin", Aggregate::Min, "smoothed.csv", "margin")?;
    r.scalar("identity_deviation", cert.identity_deviation);
    r.scalar("flat_points", cert.flat_points as f64);
    r.scalar("min_strict_margin", cert.min_strict_margin);
    Ok(r)
}

/// The glued potential of a partitioned scenario.
pub fn run_potential(sc: &Scenario) -> CliResult<Report> {
    let h = sc.assembled()?;
    let per = sc.grid();
    let mut t = Table::new("potential.csv", &["x", "segment", "h", "dh"]);
    for p in h.pieces() {
        let w = p.beta.source_width();
        for i in 0..per {
            let x = p.offset + w * i as f64 / (per - 1) as f64;
            let (v, dv) = h.eval(x);
            t.push(vec![x.into(), (h.piece_index(x) + 1).into(), v.into(), dv.into()]);
        }
    }
    let mut j = Table::new("junctions.csv", &["junction", "left", "right", "mismatch"]);
    for (k, ((l, r), m)) in h.junction_values().iter().zip(h.junction_mismatches()).enumerate() {
        j.push(vec![(k + 1).into(), (*l).into(), (*r).into(), (*m).into()]);
    }
    let mut r = Report::new("potential");
    r.text("segments", h.pieces().len());
    r.add_table(t);
    let has_junctions = !j.rows.is_empty();
    r.add_table(j);
    r.scalar("eps", h.epsilon());
    r.scalar("length", h.length());
    r.derived("h_left", Aggregate::First, "potential.csv", "h")?;
    r.derived("h_right", Aggregate::Last, "potential.csv", "h")?;
    r.derived("max_slope", Aggregate::Max, "potential.csv", "dh")?;
    if has_junctions {
        r.derived("junction_mismatch_max", Aggregate::Max, "junctions.csv", "mismatch")?;
    }
    Ok(r)
}

pub const WIDTH_HEADER: [&str; 10] =
    ["n", "kappa", "sigma", "d", "classical", "ell", "ell_residual", "ell_sigma", "ell_sigma_residual", "status"];

fn status_of(e: &Error) -> &'static str {
    match e {
        Error::Domain(_) => "domain",
        Error::Threshold { .. } => "threshold",
        Error::Divergent { .. } => "divergent",
        Error::NoRoot { .. } => "no-root",
        _ => "error",
    }
}

/// One row of width bounds; failures are recorded in the status column.
pub fn width_row(n: usize, kappa: f64, sigma: Option<f64>, d: Option<f64>) -> Vec<crate::report::Cell> {
    let mut status = Vec::new();
    let classical = match classical_bound(n, kappa) {
        Ok(b) => b.value,
        Err(e) => {
            status.push(format!("classical:{}", status_of(&e)));
            f64::NAN
        }
    };
    let (mut ell, mut ell_res, mut ell_s, mut ell_s_res) = (f64::NAN, f64::NAN, f64::NAN, f64::NAN);
    if let Some(d) = d {
        match ell_nonneg(n, kappa, d) {
            Ok(b) => (ell, ell_res) = (b.value, b.residual),
            Err(e) => status.push(format!("ell:{}", status_of(&e))),
        }
        if let Some(sigma) = sigma {
            match ell_negative(n, kappa, sigma, d) {
                Ok(b) => (ell_s, ell_s_res) = (b.value, b.residual),
                Err(e) => status.push(format!("ell_sigma:{}", status_of(&e))),
            }
        }
    }
    let status = if status.is_empty() { "ok".to_string() } else { status.join(";") };
    vec![
        n.into(),
        kappa.into(),
        sigma.unwrap_or(f64::NAN).into(),
        d.unwrap_or(f64::NAN).into(),
        classical.into(),
        ell.into(),
        ell_res.into(),
        ell_s.into(),
        ell_s_res.into(),
        status.into(),
    ]
}

pub fn run_width(n: usize, kappa: f64, sigma: Option<f64>, d: Option<f64>) -> CliResult<Report> {
    let mut t = Table::new("width.csv", &WIDTH_HEADER);
    t.push(width_row(n, kappa, sigma, d));
    let mut r = Report::new("width");
    r.add_table(t);
    r.derived("classical", Aggregate::First, "width.csv", "classical")?;
    if d.is_some() {
        r.derived("ell", Aggregate::First, "width.csv", "ell")?;
        if sigma.is_some() {
            r.derived("ell_sigma", Aggregate::First, "width.csv", "ell_sigma")?;
        }
    }
    Ok(r)
}

pub fn run_sweep(sc: &Scenario) -> CliResult<Report> {
    let sw = sc.sweep.as_ref().ok_or_else(|| CliError::Parse("missing [sweep] section".into()))?;
    if sw.n.is_empty() || sw.kappa.is_empty() {
        return Err(CliError::Parse("sweep.n and sweep.kappa must be non-empty".into()));
    }
    let sigmas: Vec<Option<f64>> = if sw.sigma.is_empty() { vec![None] } else { sw.sigma.iter().map(|s| Some(*s)).collect() };
    let mut points = Vec::new();
    for &n in &sw.n {
        for &kappa in &sw.kappa {
            let mut ds: Vec<Option<f64>> = sw.d.iter().map(|d| Some(*d)).collect();
            ds.extend(sw.d_fraction.iter().map(|f| Some(f * 2.0 * std::f64::consts::PI / (kappa.sqrt() * n as f64))));
            if ds.is_empty() {
                ds.push(None);
            }
            for &sigma in &sigmas {
                for &d in &ds {
                    points.push((n, kappa, sigma, d));
                }
            }
        }
    }
    let rows: Vec<_> = points.par_iter().map(|&(n, k, s, d)| width_row(n, k, s, d)).collect();
    let mut t = Table::new("sweep.csv", &WIDTH_HEADER);
    for row in rows {
        t.push(row);
    }
    let mut r = Report::new("sweep");
    r.add_table(t);
    r.derived("points", Aggregate::Count, "sweep.csv", "n")?;
    r.derived("ell_residual_max", Aggregate::Max, "sweep.csv", "ell_residual")?;
    r.derived("ell_sigma_residual_max", Aggregate::Max, "sweep.csv", "ell_sigma_residual")?;
    Ok(r)
}

fn segments_table(sc: &Scenario, models: &[ModelSpace]) -> CliResult<Table> {
    let spec = sc.band_spec(models)?;
    let mut t = Table::new(
        "segments.csv",
        &["segment", "measured_width", "model_width", "family", "a", "b", "scal_lower", "model_scal", "model_h_minus", "model_h_plus"],
    );
    for (j, (seg, m)) in spec.segments.iter().zip(models).enumerate() {
        let d = m.domain();
        let (hm, hp) = m.boundary_mean_curvatures();
        t.push(vec![
            (j + 1).into(),
            seg.width.into(),
            m.width_of().into(),
            family_label(m).into(),
            d.lo.into(),
            d.hi.into(),
            seg.scal_lower.into(),
            m.scalar_curvature().into(),
            hm.into(),
            hp.into(),
        ]);
    }
    Ok(t)
}

/// Full pipeline: hypotheses, width comparison, and in the contradiction
/// branch the assembled potential with its condition certificate.
pub fn run_verify(sc: &Scenario) -> CliResult<(Report, i32)> {
    let models = sc.models()?;
    let spec = sc.band_spec(&models)?;
    let mut r = Report::new("verify");
    r.add_table(segments_table(sc, &models)?);
    r.derived("segments", Aggregate::Count, "segments.csv", "segment")?;

    if let Err(e) = check_hypotheses(&spec, &models) {
        return match e {
            Error::Hypothesis { bullet, detail } => {
                r.text("verdict", "hypothesis-violated");
                r.text("bullet", bullet as usize);
                r.text("detail", detail);
                Ok((r, EXIT_HYPOTHESIS))
            }
            other => Err(other.into()),
        };
    }
    if let Some(j) = spec.segments.iter().zip(&models).position(|(s, m)| s.width <= m.width_of()) {
        r.text("verdict", "width-bound-holds");
        r.text("index", j + 1);
        return Ok((r, EXIT_OK));
    }

    let grid = sc.grid();
    let (potential, trail): (_, Vec<EpsilonAttempt>) = match sc.solver.eps {
        Some(eps) => match assemble(&spec, &models, eps) {
            Ok(p) => (Some(p), Vec::new()),
            Err(e @ (Error::Certificate(_) | Error::Domain(_))) => {
                (None, vec![EpsilonAttempt { eps, outcome: Err(e.to_string()) }])
            }
            Err(e) => return Err(e.into()),
        },
        None => match default_epsilon_on_grid(&spec, &models, grid) {
            Ok(search) => (Some(search.potential), search.trail),
            Err(Error::Certificate(msg)) => (None, vec![EpsilonAttempt { eps: f64::NAN, outcome: Err(msg) }]),
            Err(e) => return Err(e.into()),
        },
    };
    let mut eps_table = Table::new("epsilon.csv", &["attempt", "eps", "smallest_margin", "status"]);
    for (i, a) in trail.iter().enumerate() {
        let (m, status) = match &a.outcome {
            Ok(m) => (*m, "assembled".to_string()),
            Err(e) => (f64::NAN, e.clone()),
        };
        eps_table.push(vec![(i + 1).into(), a.eps.into(), m.into(), status.into()]);
    }
    let has_trail = !eps_table.rows.is_empty();
    r.add_table(eps_table);

    let Some(h) = potential else {
        r.text("verdict", "inconclusive");
        r.text("detail", "no transition width yields a certificate");
        return Ok((r, EXIT_INCONCLUSIVE));
    };
    let samples = condition_samples(&h, &spec, grid);
    let cert: ConditionCertificate = certificate_from_samples(&h, &spec, &samples);
    let mut t = Table::new("potential.csv", &["x", "segment", "h", "grad", "scal_lower", "margin"]);
    for s in &samples {
        t.push(vec![s.x.into(), (spec.segment_at(s.x) + 1).into(), s.h.into(), s.grad.into(), s.scal_lower.into(), s.margin.into()]);
    }
    r.add_table(t);
    let mut j = Table::new("junctions.csv", &["junction", "left", "right", "mismatch"]);
    for (k, ((l, rv), m)) in h.junction_values().iter().zip(h.junction_mismatches()).enumerate() {
        j.push(vec![(k + 1).into(), (*l).into(), (*rv).into(), (*m).into()]);
    }
    let has_junctions = !j.rows.is_empty();
    r.add_table(j);

    let exit = if cert.passed { EXIT_CONTRADICTION } else { EXIT_INCONCLUSIVE };
    r.text("verdict", if cert.passed { "contradiction-certificate" } else { "inconclusive" });
    r.text("note", PB_NOTE);
    r.text("certificate", if cert.passed { "passed" } else { "failed" });
    r.scalar("eps", h.epsilon());
    if has_trail {
        r.derived("eps_attempts", Aggregate::Count, "epsilon.csv", "attempt")?;
    }
    r.derived("min_margin", Aggregate::Min, "potential.csv", "margin")?;
    r.scalar("argmin", cert.argmin);
    r.scalar("boundary_minus_margin", cert.boundary_minus_margin);
    r.scalar("boundary_plus_margin", cert.boundary_plus_margin);
    r.derived("band_length", Aggregate::Last, "potential.csv", "x")?;
    if has_junctions {
        r.derived("junction_mismatch_max", Aggregate::Max, "junctions.csv", "mismatch")?;
    }
    Ok((r, exit))
}

/// Solves the bubble problem of a warped-1d or grid-2d scenario.
pub fn run_bubble(sc: &Scenario) -> CliResult<Report> {
    match sc.grid_band()? {
        GridBand::Warped1d(band) => {
            let res = minimize_1d(&band)?;
            let values = band.functional();
            let mut t = Table::new("functional.csv", &["node", "t", "F", "slice_curvature", "h"]);
            for (i, f) in values.iter().enumerate() {
                let x = band.node(i);
                t.push(vec![i.into(), x.into(), (*f).into(), band.slice_curvature(x).into(), band.potential(x).0.into()]);
            }
            let floor = sc.band.scal_floor;
            let stab = stability_1d(&band, &res, &|t| floor.unwrap_or_else(|| band.ambient_scalar_curvature(t)));
            let mut r = Report::new("bubble warped-1d");
            r.text("degenerate", res.degenerate);
            r.text("stability", if stab.failed { "failed" } else { "positive" });
            r.text("psi_one_contradiction", stab.psi_one.contradiction);
            r.add_table(t);
            r.derived("energy", Aggregate::Min, "functional.csv", "F")?;
            r.scalar("s_node", res.s_node);
            r.scalar("s_star", res.s_star);
            r.scalar("spacing", band.spacing());
            r.scalar("residual", res.residual);
            r.scalar("second_difference", res.second_difference);
            r.scalar("barrier_minus_margin", res.barrier.minus_margin);
            r.scalar("barrier_plus_margin", res.barrier.plus_margin);
            r.scalar("stability_min", stab.min_value);
            r.scalar("b", stab.b);
            r.scalar("psi_one_lhs", stab.psi_one.lhs);
            r.scalar("psi_one_rhs", stab.psi_one.rhs);
            Ok(r)
        }
        GridBand::Grid2d(grid) => {
            let res = minimize_2d(&grid)?;
            let mut vertices = Table::new("boundary.csv", &["line", "vertex", "x", "y"]);
            let mut faces = Table::new("faces.csv", &["line", "face", "x_mid", "y_mid", "h_inside", "h_outside"]);
            let mut curv = Table::new("curvature.csv", &["line", "face", "kappa", "h_avg", "residual"]);
            for (l, line) in res.boundary.iter().enumerate() {
                for (v, p) in line.points.iter().enumerate() {
                    vertices.push(vec![(l + 1).into(), v.into(), p.0.into(), p.1.into()]);
                }
                for (k, (f, w)) in line.faces.iter().zip(line.points.windows(2)).enumerate() {
                    faces.push(vec![
                        (l + 1).into(),
                        k.into(),
                        (0.5 * (w[0].0 + w[1].0)).into(),
                        (0.5 * (w[0].1 + w[1].1)).into(),
                        grid.h()[f.inside].into(),
                        grid.h()[f.outside].into(),
                    ]);
                }
                for (k, kappa, h) in stencil_curvatures(&grid, line) {
                    curv.push(vec![(l + 1).into(), k.into(), kappa.into(), h.into(), (kappa - h).abs().into()]);
                }
            }
            let floor = sc.band.scal_floor.unwrap_or(0.0);
            let stab = stability_2d(&grid, &res, &|_, _| floor);
            let variation = first_variation_2d(&grid, &res);
            let mut r = Report::new("bubble grid-2d");
            r.text("topology", grid.topology().name());
            r.text("separates", grid.separates(&res.set));
            r.text("stability", if stab.failed { "failed" } else { "positive" });
            r.text("psi_one_contradiction", stab.psi_one.contradiction);
            let has_faces = !faces.rows.is_empty();
            let has_stencils = variation.samples > 0;
            r.add_table(vertices);
            r.add_table(faces);
            r.add_table(curv);
            r.scalar("energy", res.energy);
            r.scalar("quantized_energy", res.quantized_energy as f64);
            r.scalar("quantization_bound", res.quantization_bound);
            r.scalar("perimeter", res.perimeter);
            r.scalar("cell", grid.delta());
            r.scalar("set_cells", res.set.count() as f64);
            if has_faces {
                r.derived("faces", Aggregate::Count, "faces.csv", "face")?;
                r.derived("centroid_x", Aggregate::Mean, "faces.csv", "x_mid")?;
            }
            if has_stencils {
                r.derived("residual_max", Aggregate::Max, "curvature.csv", "residual")?;
                r.derived("residual_mean", Aggregate::Mean, "curvature.csv", "residual")?;
            }
            r.scalar("barrier_minus_margin", res.barrier.minus_margin);
            r.scalar("barrier_plus_margin", res.barrier.plus_margin);
            r.scalar("stability_min", stab.min_value);
            r.scalar("b", stab.b);
            r.scalar("psi_one_lhs", stab.psi_one.lhs);
            r.scalar("psi_one_rhs", stab.psi_one.rhs);
            Ok(r)
        }
    }
}
