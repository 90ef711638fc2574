use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use super::config::{Experiment, ExperimentConfig, Format};
use super::output::{line_chart, Table};
use crate::entangle::{self, MeasurementSetup};
use crate::error::QError;
use crate::nonlocal::{self, RtoConfig};
use crate::optics::{self, MziConfig};
use crate::qcore::{c, normalize, partial_trace, purity, schmidt, Side};
use crate::stochastic::{estimate_correlation, sample_joint, Port};

/// Identifier of the summary layout in `schema/summary.schema.json`.
pub const SUMMARY_SCHEMA_ID: &str = "qcorr-summary/1";

/// JSON Schema for [`Summary`].
pub const SUMMARY_SCHEMA: &str = include_str!("../../schema/summary.schema.json");

pub const SCAN_HEADER: [&str; 8] = ["dphi_rad", "p11", "p12", "p21", "p22", "p_corr", "p_anti", "E"];
pub const MZI_HEADER: [&str; 3] = ["dphi_rad", "p_d1", "p_d2"];

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{experiment}: cannot write {}: {source}", path.display())]
    Io {
        experiment: Experiment,
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{experiment}: {source}")]
    Model { experiment: Experiment, source: QError },
}

/// Machine-readable record of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub schema: &'static str,
    pub experiment: Experiment,
    pub config: ExperimentConfig,
    pub metrics: BTreeMap<String, Value>,
    pub notes: Vec<String>,
    pub files: Vec<String>,
}

impl Summary {
    pub fn metric_f64(&self, key: &str) -> Option<f64> {
        self.metrics.get(key).and_then(Value::as_f64)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }
}

struct Outcome {
    metrics: BTreeMap<String, Value>,
    notes: Vec<String>,
    table: Option<Table>,
    chart: Option<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            metrics: BTreeMap::new(),
            notes: Vec::new(),
            table: None,
            chart: None,
        }
    }

    fn metric(&mut self, key: &str, v: impl Into<Value>) {
        self.metrics.insert(key.to_string(), v.into());
    }
}

/// Runs one experiment and writes the requested formats into
/// `cfg.output_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Summary, RunError> {
    let exp = cfg.experiment;
    let model = |source| RunError::Model {
        experiment: exp,
        source,
    };
    let mut out = match exp {
        Experiment::Mzi => run_mzi(cfg),
        Experiment::DelayedChoice => run_delayed_choice(cfg),
        Experiment::Measure => run_measure(cfg).map_err(model)?,
        Experiment::Rto => run_rto(cfg),
        Experiment::Scan => run_scan(cfg),
        Experiment::Bell => run_bell(cfg).map_err(model)?,
        Experiment::Table1 => run_table1(),
        Experiment::Sample => run_sample(cfg),
    };

    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir).map_err(|source| RunError::Io {
        experiment: exp,
        path: dir.clone(),
        source,
    })?;

    let mut files = Vec::new();
    let stem = exp.name();
    if cfg.wants(Format::Csv) {
        if let Some(table) = &out.table {
            files.push(write(exp, dir, &format!("{stem}.csv"), &table.to_csv())?);
        }
    }
    if cfg.wants(Format::Svg) {
        match &out.chart {
            Some(svg) => files.push(write(exp, dir, &format!("{stem}.svg"), svg)?),
            None => out.notes.push(format!("no chart is defined for {stem}; svg skipped")),
        }
    }
    let summary_name = format!("{stem}.summary.json");
    if cfg.wants(Format::Json) {
        files.push(summary_name.clone());
    }
    let summary = Summary {
        schema: SUMMARY_SCHEMA_ID,
        experiment: exp,
        config: cfg.clone(),
        metrics: out.metrics,
        notes: out.notes,
        files,
    };
    if cfg.wants(Format::Json) {
        write(exp, dir, &summary_name, &summary.to_json())?;
    }
    Ok(summary)
}

fn write(exp: Experiment, dir: &Path, name: &str, contents: &str) -> Result<String, RunError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|source| RunError::Io {
        experiment: exp,
        path,
        source,
    })?;
    Ok(name.to_string())
}

fn run_mzi(cfg: &ExperimentConfig) -> Outcome {
    let grid = cfg.grid.values();
    let rows: Vec<(f64, f64, f64)> = grid
        .par_iter()
        .map(|&d| {
            let (p1, p2) = optics::mzi_probabilities(&MziConfig::new(d, 0.0, true));
            (d, p1, p2)
        })
        .collect();
    let mut table = Table::new(&MZI_HEADER);
    let mut max_err: f64 = 0.0;
    let mut max_open: f64 = 0.0;
    for &(d, p1, p2) in &rows {
        table.push(vec![d.into(), p1.into(), p2.into()]);
        max_err = max_err.max((p1 - (1.0 + d.cos()) / 2.0).abs());
        let (o1, o2) = optics::mzi_probabilities(&MziConfig::new(d, 0.0, false));
        max_open = max_open.max((o1 - 0.5).abs()).max((o2 - 0.5).abs());
    }
    let mut out = Outcome::new();
    let (p_zero, _) = optics::mzi_probabilities(&MziConfig::new(0.0, 0.0, true));
    let at_config = optics::mzi_probabilities(&MziConfig::new(cfg.phase_a, cfg.phase_b, true));
    out.metric("points", rows.len());
    out.metric("p_d1_at_zero", p_zero);
    out.metric("max_abs_error_vs_cosine", max_err);
    out.metric("max_abs_deviation_without_bs2", max_open);
    out.metric("p_d1_at_config", at_config.0);
    out.metric("p_d2_at_config", at_config.1);
    let xs: Vec<f64> = rows.iter().map(|r| r.0).collect();
    out.chart = Some(line_chart(
        "Single-photon interferometer",
        "phase difference (rad)",
        "detection probability",
        &xs,
        &[
            ("P(D1)", rows.iter().map(|r| r.1).collect()),
            ("P(D2)", rows.iter().map(|r| r.2).collect()),
        ],
    ));
    out.table = Some(table);
    out
}

fn run_delayed_choice(cfg: &ExperimentConfig) -> Outcome {
    let phi = cfg.phase_a - cfg.phase_b;
    let t = optics::delayed_choice(cfg.trials, phi, cfg.seed);
    let mut table = Table::new(&["branch", "d1", "d2"]);
    table.push(vec!["bs2_on".into(), t.on.d1.into(), t.on.d2.into()]);
    table.push(vec!["bs2_off".into(), t.off.d1.into(), t.off.d2.into()]);
    let mut out = Outcome::new();
    out.metric("on_d1", t.on.d1);
    out.metric("on_d2", t.on.d2);
    out.metric("off_d1", t.off.d1);
    out.metric("off_d2", t.off.d2);
    out.metric("on_d1_fraction", t.on.d1_fraction());
    out.metric("off_d1_fraction", t.off.d1_fraction());
    out.metric(
        "on_p_d1_expected",
        optics::mzi_probabilities(&MziConfig::new(phi, 0.0, true)).0,
    );
    out.table = Some(table);
    out
}

fn run_measure(cfg: &ExperimentConfig) -> Result<Outcome, QError> {
    let setup = MeasurementSetup::with_phase(cfg.phase_a);
    let input = normalize(entangle::system_basis(), vec![c(1.0, 0.0), c(1.0, 0.0)])?;
    let state = entangle::premeasure(&input, &setup)?;
    let ra = partial_trace(&state, Side::A)?;
    let rb = partial_trace(&state, Side::B)?;
    let sv = schmidt(&state);

    let mut out = Outcome::new();
    let mut table = Table::new(&["quantity", "value"]);
    let mut put = |out: &mut Outcome, key: &str, v: f64| {
        table.push(vec![key.into(), v.into()]);
        out.metric(key, v);
    };
    put(&mut out, "correlation_phase", cfg.phase_a);
    for (i, s) in sv.iter().enumerate() {
        put(&mut out, &format!("schmidt_{i}"), *s);
    }
    put(&mut out, "purity_a", purity(&ra));
    put(&mut out, "purity_b", purity(&rb));
    put(&mut out, "reduced_a_psi1", ra.populations()[0]);
    put(&mut out, "reduced_a_psi2", ra.populations()[1]);
    put(&mut out, "reduced_b_1", rb.populations()[0]);
    put(&mut out, "reduced_b_2", rb.populations()[1]);
    put(
        &mut out,
        "cross_term_weight_a",
        entangle::cross_term_weight(&state, Side::A)?,
    );
    put(
        &mut out,
        "cross_term_weight_b",
        entangle::cross_term_weight(&state, Side::B)?,
    );
    put(
        &mut out,
        "single_system_cross_term_weight",
        entangle::coherence(&crate::qcore::density_of(&input))?,
    );
    out.metric("is_product", entangle::is_product(&state));
    out.table = Some(table);
    Ok(out)
}

fn scan_row(d: f64) -> (f64, nonlocal::CorrelationStats) {
    (d, nonlocal::joint_probs(&RtoConfig::new(0.0, d)))
}

fn push_scan_row(table: &mut Table, d: f64, s: &nonlocal::CorrelationStats) {
    table.push(vec![
        d.into(),
        s.p11.into(),
        s.p12.into(),
        s.p21.into(),
        s.p22.into(),
        s.p_corr.into(),
        s.p_anti.into(),
        s.e.into(),
    ]);
}

fn run_rto(cfg: &ExperimentConfig) -> Outcome {
    let rto = RtoConfig::new(cfg.phase_a, cfg.phase_b);
    let s = nonlocal::joint_probs(&rto);
    let m = nonlocal::marginals(&rto);
    let mut table = Table::new(&SCAN_HEADER);
    push_scan_row(&mut table, rto.difference(), &s);
    let mut out = Outcome::new();
    out.metric("dphi_rad", rto.difference());
    for (k, v) in [
        ("p11", s.p11),
        ("p12", s.p12),
        ("p21", s.p21),
        ("p22", s.p22),
        ("p_corr", s.p_corr),
        ("p_anti", s.p_anti),
        ("E", s.e),
        ("cos_dphi", rto.difference().cos()),
        ("marginal_a1", m.a1),
        ("marginal_a2", m.a2),
        ("marginal_b1", m.b1),
        ("marginal_b2", m.b2),
    ] {
        out.metric(k, v);
    }
    out.table = Some(table);
    out
}

fn run_scan(cfg: &ExperimentConfig) -> Outcome {
    let rows: Vec<_> = cfg.grid.values().par_iter().map(|&d| scan_row(d)).collect();
    let mut table = Table::new(&SCAN_HEADER);
    let mut max_err: f64 = 0.0;
    for (d, s) in &rows {
        push_scan_row(&mut table, *d, s);
        max_err = max_err.max((s.e - d.cos()).abs());
    }
    let mut out = Outcome::new();
    out.metric("points", rows.len());
    out.metric("max_abs_error_vs_cosine", max_err);
    let xs: Vec<f64> = rows.iter().map(|r| r.0).collect();
    out.chart = Some(line_chart(
        "Degree of correlation",
        "phi_B - phi_A (rad)",
        "E",
        &xs,
        &[("E", rows.iter().map(|r| r.1.e).collect())],
    ));
    out.table = Some(table);
    out
}

fn run_bell(cfg: &ExperimentConfig) -> Result<Outcome, QError> {
    let grid = cfg.grid.values();
    let rows = nonlocal::bell_scan(&grid)?;
    let mut table = Table::new(&["dphi_rad", "bell1964_margin", "chsh_margin", "best_margin", "violated"]);
    for r in &rows {
        table.push(vec![
            r.dphi.into(),
            r.bell_1964_margin.into(),
            r.chsh_margin.into(),
            r.best_margin.into(),
            r.violated.into(),
        ]);
    }
    let optimum = nonlocal::chsh(0.0, FRAC_PI_2, FRAC_PI_4, 3.0 * FRAC_PI_4);
    let three = nonlocal::bell_1964(0.0, FRAC_PI_4, FRAC_PI_2);
    let violated = rows.iter().filter(|r| r.violated).count();

    let mut out = Outcome::new();
    out.metric("points", rows.len());
    out.metric("violated_points", violated);
    out.metric(
        "max_best_margin",
        rows.iter().map(|r| r.best_margin).fold(f64::NEG_INFINITY, f64::max),
    );
    out.metric("chsh_optimal_s", optimum.value);
    out.metric("chsh_optimal_margin", optimum.margin);
    out.metric(
        "chsh_local_max",
        nonlocal::chsh_local_max(0.0, FRAC_PI_2, FRAC_PI_4, 3.0 * FRAC_PI_4),
    );
    out.metric("bell_1964_lhs", three.lhs);
    out.metric("bell_1964_bound", three.bound);
    out.metric("bell_1964_margin", three.margin);
    out.notes
        .push(format!("bell_1964 convention: {}", nonlocal::BELL_1964_CONVENTION));
    out.notes
        .push(format!("chsh convention: {}", nonlocal::CHSH_CONVENTION));
    out.notes.push(
        "setting ladders: (0, Δφ, 2Δφ) for the three-setting form, (a, a', b, b') = (0, 2Δφ, Δφ, 3Δφ) for CHSH; \
         grid points outside the violated region are reported, not hidden"
            .to_string(),
    );
    let xs: Vec<f64> = rows.iter().map(|r| r.dphi).collect();
    out.chart = Some(line_chart(
        "Bell and CHSH margins",
        "phase step (rad)",
        "margin",
        &xs,
        &[
            ("three-setting", rows.iter().map(|r| r.bell_1964_margin).collect()),
            ("CHSH", rows.iter().map(|r| r.chsh_margin).collect()),
        ],
    ));
    out.table = Some(table);
    Ok(out)
}

fn run_table1() -> Outcome {
    let rows = nonlocal::table1();
    let mut table = Table::new(&[
        "phase_rad",
        "simple_p1",
        "simple_p2",
        "marginal_a1",
        "marginal_a2",
        "marginal_b1",
        "marginal_b2",
        "p_corr",
        "p_anti",
        "published_p_corr",
        "matches_published",
    ]);
    let mut out = Outcome::new();
    for r in &rows {
        table.push(vec![
            r.phase.into(),
            r.simple_p1.into(),
            r.simple_p2.into(),
            r.marginals.a1.into(),
            r.marginals.a2.into(),
            r.marginals.b1.into(),
            r.marginals.b2.into(),
            r.p_corr.into(),
            r.p_anti.into(),
            r.published_p_corr.into(),
            r.matches_published.into(),
        ]);
        if let Some(note) = &r.note {
            out.notes.push(format!("phase {:.5} rad: {note}", r.phase));
        }
    }
    out.metric("rows", rows.len());
    out.metric(
        "rows_matching_published",
        rows.iter().filter(|r| r.matches_published).count(),
    );
    out.table = Some(table);
    out
}

fn run_sample(cfg: &ExperimentConfig) -> Outcome {
    let rto = RtoConfig::new(cfg.phase_a, cfg.phase_b);
    let stats = nonlocal::joint_probs(&rto);
    let t = sample_joint(&stats, cfg.trials, cfg.seed);
    let mut table = Table::new(&["a", "b", "count"]);
    for a in [Port::One, Port::Two] {
        for b in [Port::One, Port::Two] {
            table.push(vec![
                a.label('A').as_str().into(),
                b.label('B').as_str().into(),
                t.get(a, b).into(),
            ]);
        }
    }
    let mut out = Outcome::new();
    out.metric("total", t.total());
    let [n11, n12, n21, n22] = t.counts();
    out.metric("n11", n11);
    out.metric("n12", n12);
    out.metric("n21", n21);
    out.metric("n22", n22);
    out.metric("e_expected", stats.e);
    match estimate_correlation(&t) {
        Ok(e) => {
            out.metric("e_estimate", e.value);
            out.metric("e_stderr", e.stderr);
        }
        Err(_) => out.notes.push("empty tally: no correlation estimate".to_string()),
    }
    out.table = Some(table);
    out
}
