use std::path::Path;

use serde_json::{json, Value};
use spinnet::ga::GaConfig;
use spinnet::graph::standard_graph;
use spinnet::metrology::{
    generator_qfi_ground, polynomial_fit_parity, power_law_fit, spin_squeezing, FitKind, MAX_FIT_DEGREE,
};
use spinnet::nn::{mse, predict_series, split_by_parity, train, MlpModel, TrainConfig};
use spinnet::phasespace::{equatorial_overlap_profile, husimi_grid, sx_from_husimi, symmetric_weight, to_complex};
use spinnet::spectral::{ground_state_of, lowest_levels, spectral_deformation_dn};
use spinnet::thermal::{magnetization_variance, thermal_qfi_sld, DEFAULT_CHI_STEP};
use spinnet::{evolve, CouplingScaling, GaRunRecord, Graph, GraphKind, Parity, ScalingFit, SpinSystemParams};

use crate::args::*;
use crate::error::{CliError, CliResult};
use crate::input::{read_graph, read_series};
use crate::output::{emit, render_csv, write_file, Cell, Provenance, Table};
use crate::records::export_records;

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Ga(c) => cmd_ga(&c),
        Command::Dn(c) => cmd_dn(&c),
        Command::Qfi(c) => cmd_qfi(&c),
        Command::Gap(c) => cmd_gap(&c),
        Command::Varmx(c) => cmd_varmx(&c),
        Command::Husimi(c) => cmd_husimi(&c),
        Command::T0Scaling(c) => {
            let prov = Provenance::new("t0-scaling", None, &c);
            let table = t0_table(&c.range, &c.physics)?;
            emit(&table, &prov, None, c.output.out.as_deref(), c.output.format)
        }
        Command::Fit(c) => cmd_fit(&c),
        Command::NnTrain(c) => cmd_nn_train(&c),
        Command::NnPredict(c) => cmd_nn_predict(&c),
        Command::Sweep(c) => cmd_sweep(&c),
    }
}

fn require_seed(seed: Option<u64>, command: &str) -> CliResult<u64> {
    seed.ok_or_else(|| CliError::Config(format!("`{command}` is stochastic and needs --seed")))
}

fn physics(p: &PhysicsArgs) -> CliResult<SpinSystemParams> {
    let params = p.params();
    params.validate()?;
    Ok(params)
}

fn sizes(r: &RangeArgs) -> CliResult<Vec<usize>> {
    if r.n_min == 0 || r.n_min > r.n_max {
        return Err(CliError::Config(format!(
            "invalid size range {}..={}",
            r.n_min, r.n_max
        )));
    }
    Ok((r.n_min..=r.n_max).collect())
}

fn load_graph(g: &GraphArgs) -> CliResult<Graph> {
    match &g.graph {
        Some(path) => read_graph(path),
        None => Ok(standard_graph(g.kind, g.n)?),
    }
}

/// `0-1;1-2` style edge list.
pub fn edge_label(g: &Graph) -> String {
    g.edges()
        .iter()
        .map(|(u, v)| format!("{u}-{v}"))
        .collect::<Vec<_>>()
        .join(";")
}

fn ga_config(n: usize, params: SpinSystemParams, ga: &GaArgs, seed: u64) -> CliResult<GaConfig> {
    let mut cfg = GaConfig::new(n, seed);
    cfg.population = ga.pop;
    cfg.generations = ga.gens;
    cfg.mutation_prob = ga.mut_prob;
    cfg.crossover_extra_edge_prob = ga.crossover_edge_prob;
    cfg.crossover_mode = ga.crossover;
    cfg.physics = params;
    cfg.compute_qfi = !ga.no_qfi;
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_ga(c: &GaCmd) -> CliResult<()> {
    let seed = require_seed(c.ga.seed, "ga")?;
    let cfg = ga_config(c.n, physics(&c.physics)?, &c.ga, seed)?;
    let rec = evolve(&cfg)?;
    let mut table = Table::new(&["generation", "best_dn", "mean_dn", "best_graph"]);
    for g in &rec.generations {
        table.push(vec![
            g.generation.into(),
            g.best_fitness.into(),
            g.mean_fitness.into(),
            edge_label(&g.best_graph).into(),
        ]);
    }
    if let Some(path) = &c.record {
        write_file(path, &(rec.to_json() + "\n"))?;
    }
    let summary = serde_json::to_value(&rec.summary).expect("summary serializes");
    let prov = Provenance::new("ga", Some(seed), c);
    emit(&table, &prov, Some(&summary), c.output.out.as_deref(), c.output.format)
}

fn cmd_dn(c: &GraphCmd) -> CliResult<()> {
    let p = physics(&c.physics)?;
    let g = load_graph(&c.graph)?;
    let mut table = Table::new(&["N", "graph", "D_n"]);
    table.push(vec![g.n().into(), edge_label(&g).into(), spectral_deformation_dn(&g, &p)?.into()]);
    emit(&table, &Provenance::new("dn", None, c), None, c.output.out.as_deref(), c.output.format)
}

fn cmd_qfi(c: &GraphCmd) -> CliResult<()> {
    let p = physics(&c.physics)?;
    let g = load_graph(&c.graph)?;
    let q = thermal_qfi_sld(&g, &p)?;
    let gs = ground_state_of(&g, &p)?;
    let fq = generator_qfi_ground(&gs.vector, g.n())?;
    let mut table = Table::new(&[
        "N",
        "T",
        "h",
        "thermal_qfi",
        "classical",
        "coherent",
        "ground_generator_qfi",
    ]);
    table.push(vec![
        g.n().into(),
        p.t.into(),
        p.h.into(),
        q.value.into(),
        q.classical.into(),
        q.coherent.into(),
        fq.into(),
    ]);
    emit(&table, &Provenance::new("qfi", None, c), None, c.output.out.as_deref(), c.output.format)
}

fn gap_of(g: &Graph, p: &SpinSystemParams) -> CliResult<f64> {
    if g.n() == 0 {
        return Err(CliError::Config("empty graph".into()));
    }
    let low = lowest_levels(g, p, 2)?;
    Ok((low[1] - low[0]).max(0.0))
}

fn cmd_gap(c: &GraphCmd) -> CliResult<()> {
    let p = physics(&c.physics)?;
    let g = load_graph(&c.graph)?;
    let mut table = Table::new(&["N", "h", "gap"]);
    table.push(vec![g.n().into(), p.h.into(), gap_of(&g, &p)?.into()]);
    emit(&table, &Provenance::new("gap", None, c), None, c.output.out.as_deref(), c.output.format)
}

const VARMX_COLUMNS: [&str; 8] = [
    "N",
    "T",
    "mean_mx",
    "mean_mx2",
    "var_mx",
    "chi_x",
    "fdt_estimate",
    "relative_deviation",
];

fn varmx_row(g: &Graph, p: &SpinSystemParams) -> CliResult<Vec<Cell>> {
    let v = magnetization_variance(g, p, DEFAULT_CHI_STEP)?;
    Ok(vec![
        g.n().into(),
        p.t.into(),
        v.mean_mx.into(),
        v.mean_mx2.into(),
        v.direct.into(),
        v.chi_x.into(),
        v.fdt_estimate.into(),
        v.relative_deviation.into(),
    ])
}

fn cmd_varmx(c: &GraphCmd) -> CliResult<()> {
    let p = physics(&c.physics)?;
    let g = load_graph(&c.graph)?;
    let mut table = Table::new(&VARMX_COLUMNS);
    table.push(varmx_row(&g, &p)?);
    emit(&table, &Provenance::new("varmx", None, c), None, c.output.out.as_deref(), c.output.format)
}

struct HusimiSummary {
    argmax_phi: f64,
    max_overlap: f64,
    normalization: f64,
    symmetric_weight: f64,
    sx_exact_symbol: f64,
    sx_raw_integral: f64,
    sx_direct: f64,
    reliable: bool,
}

fn husimi_of(
    g: &Graph,
    p: &SpinSystemParams,
    n_theta: usize,
    n_phi: usize,
) -> CliResult<(spinnet::phasespace::HusimiGrid, spinnet::phasespace::EquatorialProfile, HusimiSummary)> {
    let gs = ground_state_of(g, p)?;
    let psi = to_complex(&gs.vector);
    let grid = husimi_grid(&psi, n_theta, n_phi)?;
    let profile = equatorial_overlap_profile(&psi, n_phi)?;
    let sx = sx_from_husimi(&grid, &psi)?;
    let summary = HusimiSummary {
        argmax_phi: profile.argmax_phi,
        max_overlap: profile.max_overlap,
        normalization: grid.normalization(),
        symmetric_weight: symmetric_weight(&psi)?,
        sx_exact_symbol: sx.exact_symbol,
        sx_raw_integral: sx.raw_integral,
        sx_direct: sx.direct,
        reliable: sx.reliable,
    };
    Ok((grid, profile, summary))
}

fn cmd_husimi(c: &HusimiCmd) -> CliResult<()> {
    let p = physics(&c.physics)?;
    let g = load_graph(&c.graph)?;
    let (grid, profile, s) = husimi_of(&g, &p, c.n_theta, c.n_phi)?;
    let prov = Provenance::new("husimi", None, c);
    let mut table = Table::new(&["theta", "phi", "q"]);
    for (i, t) in grid.theta.iter().enumerate() {
        for (j, ph) in grid.phi.iter().enumerate() {
            table.push(vec![(*t).into(), (*ph).into(), grid.q[i][j].into()]);
        }
    }
    if let Some(path) = &c.profile {
        let mut pt = Table::new(&["phi", "abs_overlap"]);
        for &(ph, v) in &profile.points {
            pt.push(vec![ph.into(), v.into()]);
        }
        write_file(path, &render_csv(&pt, &prov))?;
    }
    let summary = json!({
        "N": g.n(),
        "argmax_phi": s.argmax_phi,
        "max_overlap": s.max_overlap,
        "normalization": s.normalization,
        "symmetric_normalization": 4.0 / (g.n() as f64 + 1.0),
        "symmetric_weight": s.symmetric_weight,
        "sx_exact_symbol": s.sx_exact_symbol,
        "sx_raw_integral": s.sx_raw_integral,
        "sx_direct": s.sx_direct,
        "sx_reliable": s.reliable,
    });
    emit(&table, &prov, Some(&summary), c.output.out.as_deref(), c.output.format)
}

fn t0_table(range: &RangeArgs, phys: &PhysicsArgs) -> CliResult<Table> {
    let base = physics(phys)?;
    let mut table = Table::new(&["scaling", "N", "E0", "gap", "F_Q", "xi2", "F_Q_over_N2"]);
    for scaling in [CouplingScaling::Bare, CouplingScaling::Kac] {
        let p = base.with_scaling(scaling);
        for n in sizes(range)? {
            let g = standard_graph(GraphKind::Complete, n)?;
            let gs = ground_state_of(&g, &p)?;
            let fq = generator_qfi_ground(&gs.vector, n)?;
            let gap = if gs.gap.is_finite() { Cell::Float(gs.gap) } else { Cell::Empty };
            table.push(vec![
                scaling.to_string().into(),
                n.into(),
                gs.energy.into(),
                gap,
                fq.into(),
                spin_squeezing(fq, n)?.into(),
                (fq / (n * n) as f64).into(),
            ]);
        }
    }
    Ok(table)
}

fn integer_sizes(data: &[(f64, f64)]) -> CliResult<(Vec<usize>, Vec<f64>)> {
    let mut ns = Vec::with_capacity(data.len());
    for &(x, _) in data {
        if x < 1.0 || x.fract() != 0.0 {
            return Err(CliError::Config(format!("size column holds `{x}`, expected positive integers")));
        }
        ns.push(x as usize);
    }
    Ok((ns, data.iter().map(|d| d.1).collect()))
}

fn fit_series(ns: &[usize], ys: &[f64], kind: FitKind, degree: usize, parity: Parity) -> spinnet::Result<ScalingFit> {
    match kind {
        FitKind::Polynomial => polynomial_fit_parity(ns, ys, degree, false, parity),
        FitKind::LoglogPolynomial => polynomial_fit_parity(ns, ys, degree, true, parity),
        FitKind::PowerLaw => power_law_fit(ns, ys, parity),
    }
}

const FIT_COLUMNS: [&str; 8] = [
    "kind",
    "parity",
    "degree",
    "n_points",
    "exponent",
    "r_squared",
    "residual",
    "coefficients",
];

fn fit_row(f: &ScalingFit) -> Vec<Cell> {
    let kind = serde_json::to_value(f.kind).expect("kind serializes");
    vec![
        kind.as_str().unwrap_or_default().into(),
        f.parity.to_string().into(),
        f.degree.into(),
        f.n_points.into(),
        f.exponent.into(),
        f.r_squared.into(),
        f.residual.into(),
        f.coefficients
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(";")
            .into(),
    ]
}

fn cmd_fit(c: &FitCmd) -> CliResult<()> {
    let data = read_series(&c.series.input, &c.series.x_column, c.series.column.as_deref())?;
    let (ns, ys) = integer_sizes(&data)?;
    let fit = fit_series(&ns, &ys, c.fit_kind, c.degree, c.parity)?;
    let mut table = Table::new(&FIT_COLUMNS);
    table.push(fit_row(&fit));
    let summary = serde_json::to_value(&fit).expect("fit serializes");
    emit(&table, &Provenance::new("fit", None, c), Some(&summary), c.output.out.as_deref(), c.output.format)
}

fn cmd_nn_train(c: &NnTrainCmd) -> CliResult<()> {
    let seed = require_seed(c.seed, "nn-train")?;
    let data = read_series(&c.series.input, &c.series.x_column, c.series.column.as_deref())?;
    let data = split_by_parity(&data, c.parity);
    let cfg = TrainConfig {
        epochs: c.epochs,
        learning_rate: c.learning_rate,
        ..TrainConfig::new(seed)
    };
    let (model, history) = train(&data, &cfg, c.parity, c.target)?;
    write_file(&c.model, &(model.to_json() + "\n"))?;
    let mut table = Table::new(&["epoch", "loss"]);
    for (k, l) in history.iter().enumerate() {
        table.push(vec![k.into(), (*l).into()]);
    }
    let mean = data.iter().map(|d| d.1).sum::<f64>() / data.len() as f64;
    let variance = data.iter().map(|d| (d.1 - mean).powi(2)).sum::<f64>() / data.len() as f64;
    let training_mse = mse(&model, &data);
    let summary = json!({
        "n_points": data.len(),
        "training_mse": training_mse,
        "target_variance": variance,
        "final_loss": history.last(),
    });
    let prov = Provenance::new("nn-train", Some(seed), c);
    emit(&table, &prov, Some(&summary), c.output.out.as_deref(), c.output.format)
}

pub fn load_model(path: &Path) -> CliResult<MlpModel> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    MlpModel::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn cmd_nn_predict(c: &NnPredictCmd) -> CliResult<()> {
    let model = load_model(&c.model)?;
    let range = RangeArgs {
        n_min: c.n_min,
        n_max: c.n_max,
    };
    let ns: Vec<f64> = sizes(&range)?
        .into_iter()
        .filter(|&n| c.all_sizes || model.parity.accepts(n))
        .map(|n| n as f64)
        .collect();
    let mut table = Table::new(&["N", "prediction"]);
    for (n, y) in predict_series(&model, &ns) {
        if !y.is_finite() {
            return Err(CliError::Numeric(format!("non-finite prediction at N = {n}")));
        }
        table.push(vec![(n as usize).into(), y.into()]);
    }
    emit(&table, &Provenance::new("nn-predict", Some(model.seed), c), None, c.output.out.as_deref(), c.output.format)
}

fn ga_rows(
    c: &SweepCmd,
    seed: u64,
    fields: &[f64],
    table: &mut Table,
    with_h: bool,
) -> CliResult<Vec<GaRunRecord>> {
    let base = physics(&c.physics)?;
    let mut records = Vec::new();
    for &h in fields {
        for n in sizes(&c.range)? {
            let cfg = ga_config(n, base.with_h(h), &c.ga, seed)?;
            let rec = evolve(&cfg)?;
            let s = &rec.summary;
            let mut row: Vec<Cell> = Vec::new();
            if with_h {
                row.push(h.into());
            }
            row.extend([
                n.into(),
                s.best_dn.into(),
                s.best_qfi.into(),
                s.first_hit_generation.into(),
                s.distinct_evaluations.into(),
                edge_label(&s.best_graph).into(),
            ]);
            table.push(row);
            records.push(rec);
        }
    }
    Ok(records)
}

fn cmd_sweep(c: &SweepCmd) -> CliResult<()> {
    let name = serde_json::to_value(c.kind).expect("kind serializes");
    let command = format!("sweep {}", name.as_str().unwrap_or_default());
    let mut seed = None;
    let mut summary: Option<Value> = None;
    let family = c.family;
    let ga_columns = [
        "N",
        "best_dn",
        "best_qfi",
        "first_hit_generation",
        "distinct_evaluations",
        "best_graph",
    ];
    let table = match c.kind {
        SweepKind::DnQfiVsN => {
            let s = require_seed(c.ga.seed, &command)?;
            seed = Some(s);
            let mut table = Table::new(&ga_columns);
            let records = ga_rows(c, s, &[c.physics.h], &mut table, false)?;
            if let Some(dir) = &c.records {
                export_records(&records, dir)?;
            }
            table
        }
        SweepKind::HSweep => {
            let s = require_seed(c.ga.seed, &command)?;
            seed = Some(s);
            if c.h_values.is_empty() {
                return Err(CliError::Config("--h-values is empty".into()));
            }
            let mut cols = vec!["h"];
            cols.extend(ga_columns);
            let mut table = Table::new(&cols);
            let records = ga_rows(c, s, &c.h_values, &mut table, true)?;
            if let Some(dir) = &c.records {
                export_records(&records, dir)?;
            }
            table
        }
        SweepKind::VarmxVsN => {
            let p = physics(&c.physics)?;
            let mut table = Table::new(&VARMX_COLUMNS);
            for n in sizes(&c.range)? {
                table.push(varmx_row(&standard_graph(family, n)?, &p)?);
            }
            table
        }
        SweepKind::RescaledQfi => {
            let p = physics(&c.physics)?;
            let mut table = Table::new(&["N", "qfi", "qfi_over_n", "qfi_over_n2"]);
            for n in sizes(&c.range)? {
                let q = thermal_qfi_sld(&standard_graph(family, n)?, &p)?.value;
                let nf = n as f64;
                table.push(vec![n.into(), q.into(), (q / nf).into(), (q / (nf * nf)).into()]);
            }
            table
        }
        SweepKind::GapVsN => {
            let p = physics(&c.physics)?;
            let mut table = Table::new(&["family", "N", "gap"]);
            for kind in [GraphKind::Cycle, GraphKind::Complete] {
                for n in sizes(&c.range)? {
                    let gap = gap_of(&standard_graph(kind, n)?, &p)?;
                    table.push(vec![kind.to_string().into(), n.into(), gap.into()]);
                }
            }
            table
        }
        SweepKind::Husimi => {
            let p = physics(&c.physics)?;
            let mut table = Table::new(&[
                "N",
                "argmax_phi",
                "max_overlap",
                "normalization",
                "symmetric_normalization",
                "symmetric_weight",
                "sx_exact_symbol",
                "sx_direct",
            ]);
            for n in sizes(&c.range)? {
                let (_, _, s) = husimi_of(&standard_graph(family, n)?, &p, c.n_theta, c.n_phi)?;
                table.push(vec![
                    n.into(),
                    s.argmax_phi.into(),
                    s.max_overlap.into(),
                    s.normalization.into(),
                    (4.0 / (n as f64 + 1.0)).into(),
                    s.symmetric_weight.into(),
                    s.sx_exact_symbol.into(),
                    s.sx_direct.into(),
                ]);
            }
            table
        }
        SweepKind::T0Scaling => t0_table(&c.range, &c.physics)?,
        SweepKind::Fits => {
            let input = c
                .input
                .as_ref()
                .ok_or_else(|| CliError::Config("`sweep fits` needs --input".into()))?;
            let data = read_series(input, &c.x_column, c.column.as_deref())?;
            let (ns, ys) = integer_sizes(&data)?;
            let mut table = Table::new(&FIT_COLUMNS);
            let mut skipped = Vec::new();
            for parity in [Parity::All, Parity::Even, Parity::Odd] {
                let mut plan: Vec<(FitKind, usize)> =
                    (1..=MAX_FIT_DEGREE).map(|d| (FitKind::Polynomial, d)).collect();
                plan.push((FitKind::LoglogPolynomial, 1));
                plan.push((FitKind::PowerLaw, 1));
                for (kind, degree) in plan {
                    match fit_series(&ns, &ys, kind, degree, parity) {
                        Ok(f) => table.push(fit_row(&f)),
                        Err(e) if matches!(e, spinnet::Error::InsufficientData(_)) => {
                            skipped.push(format!("{kind:?}/{degree}/{parity}: {e}"));
                        }
                        Err(e) => return Err(e.into()),
                    }
                }
            }
            summary = Some(json!({ "skipped": skipped }));
            table
        }
    };
    let prov = Provenance::new(&command, seed, c);
    emit(&table, &prov, summary.as_ref(), c.output.out.as_deref(), c.output.format)
}
