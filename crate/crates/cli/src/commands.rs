use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use photonic_fusion::channel::{basis_fidelity_model, compose_total_chi, BasisMap, ChiDiagJson, ChiJson, FusionChannel};
use photonic_fusion::interference::{
    antidip_curve, fit_antidip, synthetic_antidip_counts, CurveSpec, DelayGrid, DetectionWindow,
};
use photonic_fusion::numfmt::fmt_sig;
use photonic_fusion::pipeline::{run_pipeline, PipelineConfig, MEASURED_ROWS};
use photonic_fusion::quantum::state::DensityJson;
use photonic_fusion::quantum::{bell_phi_plus, concurrence, fidelity, purity};
use photonic_fusion::source::{higher_order_report, SourceParams};
use photonic_fusion::tomography::{
    all_settings, process_report, simulate_counts, simulate_process_counts, state_report, write_counts, DEFAULT_N_MC,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;
use crate::inputs::read_count_files;

pub enum Body {
    Json(Value),
    Csv(Vec<u8>),
}

fn to_json<T: Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

pub fn antidip(a: &AntidipArgs, seed: u64, format: Format) -> Result<Body> {
    let spec = CurveSpec {
        sigma_t_ps: a.sigma_t.unwrap(),
        n_av: a.n_av.unwrap(),
        p0: a.p0.unwrap(),
        delta_lambda_nm: a.delta_lambda.unwrap(),
        center_lambda_nm: a.lambda_center.unwrap(),
        window: DetectionWindow::new(a.tau_coinc.unwrap(), a.tau_rep.unwrap())?,
        grid: DelayGrid::new(a.start.unwrap(), a.stop.unwrap(), a.points.unwrap())?,
    };
    let curve = antidip_curve(&spec)?;
    let counts = if a.poisson.unwrap() {
        let delays: Vec<f64> = curve.iter().map(|p| p.delta_tau_ps).collect();
        Some(synthetic_antidip_counts(&delays, spec.n_av, spec.p0, spec.sigma_t_ps, seed)?)
    } else {
        None
    };
    let mismatch = spec.delta_lambda_nm > 0.0;
    match format {
        Format::Json => {
            let rows: Vec<Value> = curve
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let mut row = json!({
                        "delta_tau_ps": p.delta_tau_ps,
                        "p_coinc": p.p_coinc,
                        "expected_counts": p.expected_counts,
                    });
                    if let Some(m) = p.p_coinc_mismatch {
                        row["p_coinc_mismatch"] = json!(m);
                    }
                    if let Some(c) = &counts {
                        row["counts"] = json!(c[i].1 as u64);
                    }
                    row
                })
                .collect();
            Ok(Body::Json(Value::Array(rows)))
        }
        Format::Csv => {
            let mut header = vec!["delta_tau_ps", "p_coinc", "expected_counts"];
            if mismatch {
                header.push("p_coinc_mismatch");
            }
            if counts.is_some() {
                header.push("counts");
            }
            let rows: Vec<Vec<String>> = curve
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let mut r = vec![fmt_sig(p.delta_tau_ps), fmt_sig(p.p_coinc), fmt_sig(p.expected_counts)];
                    if mismatch {
                        r.push(p.p_coinc_mismatch.map(fmt_sig).unwrap_or_default());
                    }
                    if let Some(c) = &counts {
                        r.push((c[i].1 as u64).to_string());
                    }
                    r
                })
                .collect();
            Ok(Body::Csv(csv_bytes(&header, &rows)?))
        }
    }
}

fn basis_fidelities(chi: &photonic_fusion::channel::ProcessMatrix) -> BTreeMap<&'static str, f64> {
    [BasisMap::ZtoZ, BasisMap::XtoX, BasisMap::XtoY]
        .into_iter()
        .map(|m| (m.name(), basis_fidelity_model(chi, m)))
        .collect()
}

pub fn fuse(a: &FuseArgs) -> Result<Body> {
    let rho = a.state.resolve()?;
    let ch = a.channel.resolve()?;
    let channel = FusionChannel::new(ch.chi.clone(), ch.f_value)?;
    let total = compose_total_chi(&ch.chi, ch.f_value)?;
    let out = channel.apply(rho.rho());
    let p = out.trace().re;
    let mut report = json!({
        "success_prob": p,
        "leak_prob": (1.0 - p).max(0.0),
        "f_value": ch.f_value,
        "chi_total": ChiDiagJson::from(&total),
        "process_fidelity": total.process_fidelity(),
    });
    if p > 0.0 {
        let normalized = photonic_fusion::quantum::TwoQubitState::new(out.scale_real(1.0 / p))?;
        report["rho_out"] = to_json(&DensityJson::from(normalized.rho()))?;
        report["fidelity_phi_plus"] = json!(fidelity(&normalized, &bell_phi_plus())?);
        report["purity"] = json!(purity(&normalized)?);
        report["concurrence"] = json!(concurrence(&normalized)?);
    } else {
        report["rho_out"] = Value::Null;
    }
    Ok(Body::Json(report))
}

pub fn chi_compose(a: &ChiComposeArgs, format: Format) -> Result<Body> {
    const HEADER: [&str; 7] = ["delta_tau_ps", "f_value", "chi_00", "chi_zz", "chi_xy", "chi_xx", "process_fidelity"];
    let row = |dt: Option<f64>, f: f64, d: &ChiDiagJson| -> Vec<String> {
        vec![
            dt.map(fmt_sig).unwrap_or_default(),
            fmt_sig(f),
            fmt_sig(d.c00),
            fmt_sig(d.zz),
            fmt_sig(d.xy),
            fmt_sig(d.xx),
            fmt_sig(d.c00),
        ]
    };
    if let (Some(start), Some(stop)) = (a.start, a.stop) {
        ensure!(a.channel.f.is_none(), "a delay sweep takes its dephasing from the model, drop --f");
        let (chi, file_model) = a.channel.chi()?;
        let model = a.channel.dephasing_model(file_model)?;
        let grid = DelayGrid::new(start, stop, a.points.unwrap_or(41))?;
        let mut rows = Vec::new();
        for dt in grid.values() {
            let f = model.value(dt);
            rows.push((dt, f, ChiDiagJson::from(&compose_total_chi(&chi, f)?)));
        }
        return match format {
            Format::Csv => {
                let lines: Vec<_> = rows.iter().map(|(dt, f, d)| row(Some(*dt), *f, d)).collect();
                Ok(Body::Csv(csv_bytes(&HEADER, &lines)?))
            }
            Format::Json => Ok(Body::Json(json!({
                "chi_F": ChiDiagJson::from(&chi),
                "f_model": model,
                "rows": rows
                    .iter()
                    .map(|(dt, f, d)| json!({"delta_tau_ps": dt, "f_value": f, "chi_total": d}))
                    .collect::<Vec<_>>(),
            }))),
        };
    }
    let ch = a.channel.resolve()?;
    let total = compose_total_chi(&ch.chi, ch.f_value)?;
    match format {
        Format::Csv => {
            let lines = vec![row(a.channel.delta_tau, ch.f_value, &ChiDiagJson::from(&total))];
            Ok(Body::Csv(csv_bytes(&HEADER, &lines)?))
        }
        Format::Json => Ok(Body::Json(json!({
            "chi_F": ChiJson::from_chi(&ch.chi, None),
            "chi_total": ChiJson::from_chi(&total, ch.f_model.clone()),
            "f_value": ch.f_value,
            "process_fidelity": total.process_fidelity(),
            "basis_fidelities": basis_fidelities(&total),
        }))),
    }
}

fn n_mc(a: &TomoArgs) -> usize {
    a.n_mc.unwrap_or(DEFAULT_N_MC)
}

pub fn tomo_state(a: &TomoArgs, seed: u64) -> Result<Body> {
    let (table, warnings) = read_count_files(a.counts.as_deref().unwrap_or_default())?;
    let report = state_report(&table, n_mc(a), seed).context("state reconstruction")?;
    let mut v = to_json(&report)?;
    v["warnings"] = json!(warnings);
    Ok(Body::Json(v))
}

pub fn tomo_process(a: &TomoArgs, seed: u64) -> Result<Body> {
    let (table, mut warnings) = read_count_files(a.counts.as_deref().unwrap_or_default())?;
    let report = process_report(&table, n_mc(a), seed).context("process estimation")?;
    warnings.extend(report.warnings.iter().cloned());
    let mut v = to_json(&report)?;
    v["warnings"] = json!(warnings);
    Ok(Body::Json(v))
}

pub fn higher_order(a: &HigherOrderArgs) -> Result<Body> {
    let params = SourceParams::new(a.n_bar.unwrap(), a.eta.unwrap())?
        .with_cutoff(a.fock_cutoff.unwrap(), a.first_order.unwrap())?;
    Ok(Body::Json(to_json(&higher_order_report(&params, a.detector_model.unwrap())?)?))
}

/// Reads `delta_tau_ps` and `counts` (or `expected_counts`) columns.
pub fn read_antidip_data(path: &Path) -> Result<Vec<(f64, f64)>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let header = rdr.headers().with_context(|| format!("reading {}", path.display()))?.clone();
    let col = |name: &str| header.iter().position(|h| h == name);
    let Some(xi) = col("delta_tau_ps") else {
        bail!("{}: no delta_tau_ps column", path.display());
    };
    let Some(yi) = col("counts").or_else(|| col("expected_counts")) else {
        bail!("{}: no counts or expected_counts column", path.display());
    };
    let mut points = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.with_context(|| format!("{} line {line}", path.display()))?;
        let get = |k: usize, name: &str| -> Result<f64> {
            let s = rec.get(k).with_context(|| format!("{} line {line}: missing {name}", path.display()))?;
            s.parse().with_context(|| format!("{} line {line}: bad {name} {s:?}", path.display()))
        };
        points.push((get(xi, "delta_tau_ps")?, get(yi, header.get(yi).unwrap_or("counts"))?));
    }
    Ok(points)
}

pub fn fit(a: &FitArgs) -> Result<Body> {
    let Some(path) = &a.data else {
        bail!("fit needs --data <csv>");
    };
    let points = read_antidip_data(path)?;
    let result = fit_antidip(&points, a.sigma_t.unwrap_or(1.0)).context("antidip fit")?;
    let mut v = to_json(&result)?;
    v["points"] = json!(points.len());
    v["iterations"] = json!(result.iterations);
    Ok(Body::Json(v))
}

pub fn simulate(a: &SimulateArgs, seed: u64, format: Format) -> Result<Body> {
    ensure!(format == Format::Csv, "simulate writes count CSV only");
    let trials = a.trials.unwrap_or(10_000);
    let duration = a.duration.unwrap_or(1.0);
    let table = match a.mode.unwrap_or(SimulateMode::State) {
        SimulateMode::State => simulate_counts(&a.state.resolve()?, &all_settings(), trials, seed, duration)?,
        SimulateMode::Process => {
            let ch = a.channel.resolve()?;
            let channel = FusionChannel::new(ch.chi, ch.f_value)?;
            simulate_process_counts(|r| channel.apply(r), trials, seed, duration)?
        }
    };
    let mut buf = Vec::new();
    write_counts(&table, &mut buf)?;
    Ok(Body::Csv(buf))
}

pub fn pipeline_config(a: &PipelineArgs, seed: u64) -> Result<PipelineConfig> {
    let d = PipelineConfig::default();
    let chi = match &a.chi {
        Some(c) => {
            ensure!(c.len() == 4, "--chi needs four values 00,zz,xy,xx, got {}", c.len());
            [c[0], c[1], c[2], c[3]]
        }
        None => d.chi,
    };
    Ok(PipelineConfig {
        n_bar: a.n_bar.clone().unwrap_or(d.n_bar),
        eta: a.eta.unwrap_or(d.eta),
        chi,
        f_value: a.f_value.unwrap_or(d.f_value),
        counts_per_setting: a.counts_per_setting.unwrap_or(d.counts_per_setting),
        process_trials: a.process_trials.unwrap_or(d.process_trials),
        n_mc: a.n_mc.unwrap_or(d.n_mc),
        seed,
        detector_model: a.detector_model.unwrap_or(d.detector_model),
    })
}

pub fn pipeline(a: &PipelineArgs, seed: u64, format: Format) -> Result<Body> {
    let report = run_pipeline(&pipeline_config(a, seed)?).context("pipeline")?;
    match format {
        Format::Json => Ok(Body::Json(json!({
            "chi_total": report.chi_total,
            "rows": report.rows,
            "measured": MEASURED_ROWS,
        }))),
        Format::Csv => {
            let header = [
                "n_bar", "gamma", "F_model", "C_model", "P_model", "F_P_model", "C_E_model", "F", "F_err", "C",
                "C_err", "P", "P_err", "F_P", "F_P_err", "C_E", "C_E_err",
            ];
            let rows: Vec<Vec<String>> = report
                .rows
                .iter()
                .map(|r| {
                    let (m, e) = (&r.model, &r.estimated);
                    let mut out: Vec<f64> = vec![
                        r.n_bar,
                        r.gamma,
                        m.fidelity,
                        m.concurrence,
                        m.purity,
                        m.process_fidelity,
                        m.entanglement_capability,
                    ];
                    for x in [e.fidelity, e.concurrence, e.purity, e.process_fidelity, e.entanglement_capability] {
                        out.extend([x.value, x.err]);
                    }
                    out.into_iter().map(fmt_sig).collect()
                })
                .collect();
            Ok(Body::Csv(csv_bytes(&header, &rows)?))
        }
    }
}
