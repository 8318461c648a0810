use bf_core::closed_form::{
    breve_c, coeffs_e, lambda1_leading, mu_bar_leading, phase_speed, whitham_benjamin, CapillaryParam, RegionLabel,
};
use bf_core::operator_assembly::assemble_stokes;
use bf_core::spectral_engine::{eig, near_zero_quadruple_with, quadruple_at, trace_figure_eight_with, EngineConfig};
use bf_core::stokes_expansion::stokes_residual;
use bf_core::validation::{self, pairing_defect, set_distance, ValidationConfig, CRITERIA};
use bf_core::{BfError, Complex64};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{parse_grid, ConfigError, RunConfig};
use crate::output::{cnum, fmt_f64, num, ErrorInfo, Table};

/// Largest `mu` the trace may request.
const MU_CAP: f64 = 0.49;

#[derive(Debug)]
pub enum CliError {
    Domain(ErrorInfo),
    Io(ErrorInfo),
    Numerical(ErrorInfo),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain(_) => 2,
            CliError::Io(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    pub fn info(&self) -> &ErrorInfo {
        match self {
            CliError::Domain(e) | CliError::Io(e) | CliError::Numerical(e) => e,
        }
    }

    pub fn io(err: std::io::Error) -> Self {
        CliError::Io(ErrorInfo {
            kind: "Io".into(),
            message: err.to_string(),
        })
    }
}

pub fn error_kind(e: &BfError) -> &'static str {
    match e {
        BfError::SingularKappa { .. } => "SingularKappa",
        BfError::ResonantKappa { .. } => "ResonantKappa",
        BfError::NotUnstable { .. } => "NotUnstable",
        BfError::NoConvergence { .. } => "NoConvergence",
        BfError::GapFailure { .. } => "GapFailure",
        BfError::ContourTooTight { .. } => "ContourTooTight",
        BfError::RankFailure { .. } => "RankFailure",
        BfError::StructureViolation { .. } => "StructureViolation",
        BfError::DegenerateG { .. } => "DegenerateG",
        BfError::SingularSystem { .. } => "SingularSystem",
        BfError::InvalidInput(_) => "InvalidInput",
    }
}

impl From<BfError> for CliError {
    fn from(e: BfError) -> Self {
        let info = ErrorInfo {
            kind: error_kind(&e).into(),
            message: e.to_string(),
        };
        match e {
            BfError::SingularKappa { .. }
            | BfError::ResonantKappa { .. }
            | BfError::NotUnstable { .. }
            | BfError::InvalidInput(_) => CliError::Domain(info),
            _ => CliError::Numerical(info),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io(message) => CliError::Io(ErrorInfo {
                kind: "Io".into(),
                message,
            }),
            ConfigError::Invalid(message) => CliError::Domain(ErrorInfo {
                kind: "InvalidInput".into(),
                message,
            }),
        }
    }
}

/// Result of a subcommand in both tabular and structured form.
#[derive(Debug, Clone)]
pub struct Report {
    pub table: Table,
    pub data: Value,
    /// Set when the command ran but its checks did not all pass.
    pub failed: bool,
}

fn engine(cfg: &RunConfig) -> EngineConfig {
    EngineConfig {
        gap_factor: cfg.gap_factor,
        ..EngineConfig::default()
    }
}

fn opt_cell(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn opt_num(x: Option<f64>) -> Value {
    x.map(num).unwrap_or(Value::Null)
}

struct CoeffRow {
    kappa: f64,
    values: Option<[f64; 6]>,
    region: RegionLabel,
    error: Option<&'static str>,
}

fn coeff_row(kappa: f64) -> CoeffRow {
    let region = bf_core::closed_form::classify(kappa);
    let computed = CapillaryParam::new(kappa).and_then(|p| {
        let k = p.value();
        let (e11, e22, e12) = coeffs_e(k)?;
        Ok([phase_speed(k), e11, e22, e12, whitham_benjamin(k)?, breve_c(k)])
    });
    match computed {
        Ok(values) => CoeffRow {
            kappa,
            values: Some(values),
            region,
            error: None,
        },
        Err(e) => CoeffRow {
            kappa,
            values: None,
            region,
            error: Some(error_kind(&e)),
        },
    }
}

pub fn coeffs(cfg: &RunConfig) -> Result<Report, CliError> {
    let kappas = match cfg.kappa {
        Some(k) => vec![k],
        None => parse_grid(&cfg.kappa_grid)?,
    };
    if let Some(k) = kappas.iter().find(|k| **k < 0.0) {
        return Err(BfError::InvalidInput(format!("kappa must be non-negative, got {k}")).into());
    }
    let rows: Vec<CoeffRow> = kappas.par_iter().map(|&k| coeff_row(k)).collect();
    let mut table = Table::new(vec!["kappa", "c_kappa", "e11", "e22", "e12", "e_wb", "breve_c", "region", "error"]);
    let mut json_rows = vec![];
    for r in &rows {
        let mut cells = vec![fmt_f64(r.kappa)];
        cells.extend((0..6).map(|j| opt_cell(r.values.map(|v| v[j]))));
        cells.push(r.region.to_string());
        cells.push(r.error.unwrap_or("").into());
        table.push(cells);
        let field = |j: usize| opt_num(r.values.map(|v| v[j]));
        json_rows.push(json!({
            "kappa": num(r.kappa),
            "c_kappa": field(0),
            "e11": field(1),
            "e22": field(2),
            "e12": field(3),
            "e_wb": field(4),
            "breve_c": field(5),
            "region": r.region.as_str(),
            "error": r.error,
        }));
    }
    Ok(Report {
        table,
        data: json!({ "rows": json_rows }),
        failed: false,
    })
}

fn default_mu_max(kappa: f64, eps: f64, factor: f64) -> Result<f64, CliError> {
    Ok((factor * mu_bar_leading(kappa, eps)?).min(MU_CAP))
}

pub fn figure8(cfg: &RunConfig) -> Result<Report, CliError> {
    let (kappa, eps) = (cfg.require_kappa()?, cfg.require_eps()?);
    CapillaryParam::new(kappa)?;
    let mu_max = match cfg.mu_max {
        Some(m) => m,
        None => default_mu_max(kappa, eps, 1.25)?,
    };
    let branch = trace_figure_eight_with(kappa, eps, mu_max, cfg.samples, cfg.k_max, &engine(cfg))?;
    let mut table = Table::new(vec![
        "mu",
        "re_lambda1p",
        "im_lambda1p",
        "re_lambda1m",
        "im_lambda1m",
        "re_pred",
        "im_pred",
    ]);
    let mut samples = vec![];
    for (j, &mu) in branch.mu_grid.iter().enumerate() {
        let (p, m) = (branch.lambda1_plus[j], branch.lambda1_minus[j]);
        let pred = lambda1_leading(kappa, mu, eps)?.value_plus;
        table.push([mu, p.re, p.im, m.re, m.im, pred.re, pred.im].iter().map(|&x| fmt_f64(x)).collect());
        samples.push(json!({
            "mu": num(mu),
            "lambda1_plus": cnum(p),
            "lambda1_minus": cnum(m),
            "predicted": cnum(pred),
        }));
    }
    Ok(Report {
        table,
        data: json!({
            "kappa": num(kappa),
            "eps": num(eps),
            "K": cfg.k_max,
            "mu_bar_numeric": opt_num(branch.mu_bar_numeric),
            "mu_bar_leading": num(mu_bar_leading(kappa, eps)?),
            "samples": samples,
        }),
        failed: false,
    })
}

fn sorted(mut values: Vec<Complex64>) -> Vec<Complex64> {
    values.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
    values
}

pub fn spectrum(cfg: &RunConfig) -> Result<Report, CliError> {
    let (kappa, eps, mu) = (cfg.require_kappa()?, cfg.require_eps()?, cfg.require_mu()?);
    CapillaryParam::new(kappa)?;
    let ecfg = engine(cfg);
    let op = assemble_stokes(kappa, eps, mu, cfg.k_max)?;
    let spec = eig(&op)?;
    let quad = near_zero_quadruple_with(&spec, kappa, mu, &ecfg)?;
    let residual = spec.max_residual();
    let pairing = pairing_defect(&spec.eigenvalues) / spec.norm.max(1.0);

    let doubled = 2 * cfg.k_max;
    let k_doubling = if doubled <= 512 {
        let (q2, _) = quadruple_at(kappa, eps, mu, doubled, &ecfg)?;
        json!({ "K": doubled, "delta": num(set_distance(&quad.values, &q2.values)) })
    } else {
        json!({ "K": Value::Null, "delta": Value::Null })
    };

    let eigenvalues = sorted(spec.eigenvalues.clone());
    let mut table = Table::new(vec!["re", "im"]);
    for z in &eigenvalues {
        table.push(vec![fmt_f64(z.re), fmt_f64(z.im)]);
    }
    let named = if quad.labeled {
        json!({
            "lambda1_plus": cnum(quad.lambda1_plus()),
            "lambda1_minus": cnum(quad.lambda1_minus()),
            "lambda0_plus": cnum(quad.lambda0_plus()),
            "lambda0_minus": cnum(quad.lambda0_minus()),
        })
    } else {
        Value::Null
    };
    Ok(Report {
        table,
        data: json!({
            "kappa": num(kappa),
            "eps": num(eps),
            "mu": num(mu),
            "K": cfg.k_max,
            "norm": num(spec.norm),
            "residual": { "max": num(residual), "pass": residual <= 1e-9 },
            "pairing": { "defect": num(pairing), "pass": pairing <= 1e-8 },
            "quadruple": {
                "labeled": quad.labeled,
                "gap_ratio": num(quad.gap_ratio),
                "values": quad.values.iter().map(|z| cnum(*z)).collect::<Vec<_>>(),
                "named": named,
            },
            "k_doubling": k_doubling,
            "eigenvalues": eigenvalues.iter().map(|z| cnum(*z)).collect::<Vec<_>>(),
        }),
        failed: false,
    })
}

pub fn mu_bar(cfg: &RunConfig) -> Result<Report, CliError> {
    let (kappa, eps) = (cfg.require_kappa()?, cfg.require_eps()?);
    CapillaryParam::new(kappa)?;
    let lead = mu_bar_leading(kappa, eps)?;
    let mu_max = match cfg.mu_max {
        Some(m) => m,
        None => default_mu_max(kappa, eps, 1.5)?,
    };
    let branch = trace_figure_eight_with(kappa, eps, mu_max, cfg.samples, cfg.k_max, &engine(cfg))?;
    let numeric = branch.mu_bar_numeric;
    let rel = numeric.map(|m| (m - lead).abs() / lead);
    let mut table = Table::new(vec!["kappa", "eps", "mu_bar_leading", "mu_bar_numeric", "relative_difference"]);
    table.push(vec![fmt_f64(kappa), fmt_f64(eps), fmt_f64(lead), opt_cell(numeric), opt_cell(rel)]);
    Ok(Report {
        table,
        data: json!({
            "kappa": num(kappa),
            "eps": num(eps),
            "K": cfg.k_max,
            "mu_bar_leading": num(lead),
            "mu_bar_numeric": opt_num(numeric),
            "relative_difference": opt_num(rel),
        }),
        failed: false,
    })
}

pub fn residual(cfg: &RunConfig) -> Result<Report, CliError> {
    let kappa = cfg.require_kappa()?;
    CapillaryParam::new(kappa)?;
    let eps = match cfg.eps {
        Some(e) => vec![e],
        None => parse_grid(&cfg.eps_grid)?,
    };
    let rows: Vec<(f64, (f64, f64))> = eps
        .par_iter()
        .map(|&e| stokes_residual(kappa, e, cfg.k_max).map(|r| (e, r)))
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(vec!["eps", "residual_kinematic", "residual_bernoulli"]);
    let mut json_rows = vec![];
    for (e, (r1, r2)) in rows {
        table.push(vec![fmt_f64(e), fmt_f64(r1), fmt_f64(r2)]);
        json_rows.push(json!({ "eps": num(e), "residual_kinematic": num(r1), "residual_bernoulli": num(r2) }));
    }
    Ok(Report {
        table,
        data: json!({ "kappa": num(kappa), "K": cfg.k_max, "rows": json_rows }),
        failed: false,
    })
}

pub fn validate(criteria: &[usize], vcfg: &ValidationConfig) -> Result<Report, CliError> {
    if let Some(bad) = criteria.iter().find(|&&id| id == 0 || id > CRITERIA.len()) {
        return Err(BfError::InvalidInput(format!("unknown criterion {bad}")).into());
    }
    let ids: Vec<usize> = if criteria.is_empty() {
        (1..=CRITERIA.len()).collect()
    } else {
        let mut ids = criteria.to_vec();
        ids.sort_unstable();
        ids.dedup();
        ids
    };
    let outcomes: Vec<_> = ids.iter().map(|&id| validation::run(id, vcfg)).collect();
    let mut table = Table::new(vec!["id", "name", "passed", "detail"]);
    let mut json_rows = vec![];
    for o in &outcomes {
        eprintln!("{o}");
        table.push(vec![o.id.to_string(), o.name.into(), o.passed.to_string(), o.detail.clone()]);
        json_rows.push(json!({ "id": o.id, "name": o.name, "passed": o.passed, "detail": o.detail }));
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    eprintln!("{passed}/{} criteria passed", outcomes.len());
    Ok(Report {
        table,
        data: json!({ "seed": vcfg.seed, "passed": passed, "total": outcomes.len(), "criteria": json_rows }),
        failed: passed != outcomes.len(),
    })
}
