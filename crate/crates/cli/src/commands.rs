use std::f64::consts::PI;

use qexpfam::boundary::mean_value_boundary_sweep;
use qexpfam::closures::{closure_report, reduced_entropy_distance, InclusionSample};
use qexpfam::cone::{self, FamilyReport, REPORT_CAPS};
use qexpfam::expfam::{entropy_distance_continuation, project_to_family, ExponentialFamily};
use qexpfam::maximizer::{maximizer_report, write_certificates_csv};
use qexpfam::report::{boundary_svg, fmt_f64, Report, Table};
use qexpfam::state::max_eig_data;
use qexpfam::{closures, Projector};

use crate::config::{parse_state, FamilySpec, RunConfig};
use crate::output::Output;
use crate::CliError;

/// Derivative pairs in the maximizer report.
const MAXIMIZER_PAIRS: usize = 200;

/// Output directory with the resolved configuration written next to the results.
fn open(cfg: &RunConfig, quiet: bool) -> Result<Output, CliError> {
    let out = Output::new(&cfg.out_dir, quiet)?;
    out.write_text("run.cfg", &cfg.emit())?;
    Ok(out)
}

struct SweepTarget {
    label: String,
    phi: Option<f64>,
    family: ExponentialFamily,
}

fn sweep_targets(cfg: &RunConfig) -> Result<Vec<SweepTarget>, CliError> {
    let cone_target = |k: usize, phi: f64| -> Result<SweepTarget, CliError> {
        Ok(SweepTarget {
            label: format!("phi{k:02}"),
            phi: Some(phi),
            family: cone::cone_family(phi).map_err(|e| CliError::Config(e.to_string()))?,
        })
    };
    if !cfg.phi.is_empty() {
        return cfg.phi.iter().enumerate().map(|(k, &p)| cone_target(k, p)).collect();
    }
    match &cfg.family {
        Some(FamilySpec::Cone(phi)) => Ok(vec![cone_target(0, *phi)?]),
        Some(spec) => Ok(vec![SweepTarget {
            label: spec.name(),
            phi: None,
            family: cfg.build_family()?,
        }]),
        None => (0..=6).map(|k| cone_target(k, k as f64 * PI / 12.0)).collect(),
    }
}

pub fn sweep(cfg: &RunConfig, quiet: bool) -> Result<(), CliError> {
    let out = open(cfg, quiet)?;
    let targets = sweep_targets(cfg)?;
    let mut summary = Table::new([
        "index",
        "phi",
        "nonexposed_count",
        "support_residual",
        "angle_class",
        "angle_class_nonexposed",
    ]);
    for (k, t) in targets.iter().enumerate() {
        let b = mean_value_boundary_sweep(&t.family, cfg.n_angles)?;
        let marked = b.nonexposed_points();
        out.write(&format!("boundary_{}.csv", t.label), |f| b.write_csv(f))?;
        let title = match t.phi {
            Some(phi) => format!("mean value set, phi = {phi:.6}"),
            None => format!("mean value set, {}", t.label),
        };
        out.write_text(&format!("boundary_{}.svg", t.label), &boundary_svg(&b.polygon(), &marked, &title))?;
        let class = t.phi.map(cone::classify_by_angle).transpose()?;
        let mut line = format!("sweep index={k} label={} ", t.label);
        if let Some(phi) = t.phi {
            line.push_str(&format!("phi={} ", fmt_f64(phi)));
        }
        line.push_str(&format!("nonexposed={}", marked.len()));
        if let Some(c) = class {
            line.push_str(&format!(" class={} class_nonexposed={}", c.name(), c.nonexposed_count()));
        }
        out.emit(&line);
        summary.push(vec![
            k.to_string(),
            fmt_f64(t.phi.unwrap_or(f64::NAN)),
            marked.len().to_string(),
            fmt_f64(b.support_residual()),
            class.map_or(String::new(), |c| c.name().to_string()),
            class.map_or(String::new(), |c| c.nonexposed_count().to_string()),
        ]);
    }
    out.write("sweep_summary.csv", |f| summary.write_csv(f))?;
    Ok(())
}

pub fn distance(cfg: &RunConfig, state: Option<&str>, quiet: bool) -> Result<(), CliError> {
    let fam = cfg.build_family()?;
    let spec = state.ok_or_else(|| CliError::Config("distance needs --state".into()))?;
    let rho = parse_state(spec, &fam)?;
    let out = open(cfg, quiet)?;
    let opts = cfg.solver;

    let reduced = reduced_entropy_distance(&rho, &fam, &opts)?;
    let direct = project_to_family(&rho, &fam, &opts)?;
    let mut caps: Vec<f64> = REPORT_CAPS.to_vec();
    if !caps.contains(&opts.param_cap) {
        caps.push(opts.param_cap);
        caps.sort_by(f64::total_cmp);
    }
    let rows = entropy_distance_continuation(&rho, &fam, &opts, &caps)?;

    out.note(&format!("family {} state {spec}", cfg.family.as_ref().map_or(String::new(), FamilySpec::name)));
    out.emit(&format!("distance={}", fmt_f64(reduced)));
    out.emit(&format!("direct_distance={}", fmt_f64(direct.distance)));
    out.emit(&format!("attained={}", u8::from(direct.attained)));
    out.emit(&format!("param_cap={}", fmt_f64(opts.param_cap)));
    for (i, c) in direct.theta_star.iter().enumerate() {
        out.emit(&format!("theta_{i}={}", fmt_f64(*c)));
    }
    for r in &rows {
        out.emit(&format!(
            "continuation cap={} value={} attained={}",
            fmt_f64(r.cap),
            fmt_f64(r.value),
            u8::from(r.attained)
        ));
    }

    let mut summary = Table::new(["quantity", "value"]);
    summary.push(vec!["distance".into(), fmt_f64(reduced)]);
    summary.push(vec!["direct_distance".into(), fmt_f64(direct.distance)]);
    summary.push(vec!["attained".into(), u8::from(direct.attained).to_string()]);
    summary.push(vec!["param_cap".into(), fmt_f64(opts.param_cap)]);
    for (i, c) in direct.theta_star.iter().enumerate() {
        summary.push(vec![format!("theta_{i}"), fmt_f64(*c)]);
    }
    out.write("distance.csv", |f| summary.write_csv(f))?;
    let mut cont = Table::new(["cap", "value", "attained"]);
    for r in &rows {
        cont.push(vec![fmt_f64(r.cap), fmt_f64(r.value), u8::from(r.attained).to_string()]);
    }
    out.write("distance_continuation.csv", |f| cont.write_csv(f))?;
    Ok(())
}

fn emit_findings(out: &Output, report: &Report) {
    for f in &report.findings {
        out.emit(&format!(
            "finding={} value={} passed={}",
            f.name,
            fmt_f64(f.value),
            u8::from(f.passed)
        ));
    }
}

fn finish(out: &Output, name: &str, report: &Report) -> Result<(), CliError> {
    out.write(&format!("{name}_findings.csv"), |f| report.write_csv(f))?;
    emit_findings(out, report);
    let failed = report.failures().count();
    for f in report.failures() {
        out.note(&format!("violated: {} = {} ({})", f.name, f.value, f.note));
    }
    if failed > 0 {
        return Err(CliError::Contract(failed));
    }
    Ok(())
}

fn family_report(out: &Output, name: &str, r: &FamilyReport) -> Result<(), CliError> {
    out.write(&format!("{name}_continuation.csv"), |f| r.continuation.write_csv(f))?;
    out.write(&format!("{name}_atlas.csv"), |f| r.atlas.write_csv(f))?;
    out.write(&format!("{name}_boundary.csv"), |f| r.boundary.write_csv(f))?;
    let svg = boundary_svg(&r.boundary.polygon(), &r.boundary.nonexposed_points(), &format!("mean value set, {name}"));
    out.write_text(&format!("{name}_boundary.svg"), &svg)?;
    finish(out, name, &r.findings)
}

fn samples_table(samples: &[InclusionSample]) -> Table {
    let mut t = Table::new(["label", "in_geodesic_closure", "entropy_distance", "norm_distance"]);
    for s in samples {
        t.push(vec![
            s.label.clone(),
            u8::from(s.in_geodesic_closure).to_string(),
            fmt_f64(s.entropy_distance),
            fmt_f64(s.norm_distance),
        ]);
    }
    t
}

pub fn report(cfg: &RunConfig, which: Option<&str>, quiet: bool) -> Result<(), CliError> {
    let which = match (which, &cfg.family) {
        (Some(w), _) => w.to_string(),
        (None, Some(FamilySpec::Staffelberg)) => "staffelberg".into(),
        (None, Some(FamilySpec::Swallow)) => "swallow".into(),
        _ => return Err(CliError::Config("report needs one of staffelberg|swallow|closures|maximizer".into())),
    };
    let out = open(cfg, quiet)?;
    match which.as_str() {
        "staffelberg" => family_report(&out, "staffelberg", &cone::staffelberg_report(cfg.n_angles)?),
        "swallow" => family_report(&out, "swallow", &cone::swallow_report(cfg.n_angles)?),
        "closures" => {
            let fam = match cfg.family {
                Some(_) => cfg.build_family()?,
                None => closures::abelian_example(),
            };
            let (report, atlas, samples) = closure_report(&fam, cfg.n_angles, cfg.seed)?;
            out.write("closures_atlas.csv", |f| atlas.write_csv(f))?;
            out.write("closures_samples.csv", |f| samples_table(&samples).write_csv(f))?;
            finish(&out, "closures", &report)
        }
        "maximizer" => {
            let fam = match cfg.family {
                Some(_) => cfg.build_family()?,
                None => cone::staffelberg_family(),
            };
            // The Staffelberg family is searched on the face of rho(0).
            let p = if fam.same_family(&cone::staffelberg_family(), 1e-12) {
                max_eig_data(&cone::staffelberg_direction(0.0)).1
            } else {
                Projector::identity(fam.algebra())
            };
            let (report, fd, certs) = maximizer_report(&fam, &p, MAXIMIZER_PAIRS, cfg.seed)?;
            out.write("maximizer_derivatives.csv", |f| fd.write_csv(f))?;
            out.write("maximizer_certificates.csv", |f| write_certificates_csv(&certs, f))?;
            finish(&out, "maximizer", &report)
        }
        other => Err(CliError::Config(format!("unknown report '{other}'"))),
    }
}
