//! Configuration ingestion and the `verify`, `index`, `scan` and `dtn`
//! commands behind the `sigmak` binary.

use std::fmt;
use std::path::{Path, PathBuf};

use num_rational::BigRational;
use num_traits::FromPrimitive;
use serde::{Deserialize, Serialize};

use sigmak_core::boundary::{self, BoundaryInvariants};
use sigmak_core::dtn::{self, DtnMethod};
use sigmak_core::families::{self, FactorSpectrum, FamilyKind, FamilySpec};
use sigmak_core::jacobi::{self, BoundaryMode, IndexOptions, JacobiReport, ScanResult};
use sigmak_core::report::{self, fmt_f64, SCHEMA_VERSION};
use sigmak_core::symalg::{self, IsoSpectrum};

/// Grid for the Einstein-defect row of `verify`.
const DEFECT_GRID: (f64, f64, usize) = (0.1, 10.0, 200);
/// Pass threshold for the Einstein defect.
pub const DEFECT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// Failure classes, each with its own process exit code.
#[derive(Debug)]
pub enum Failure {
    Mismatch,
    Config(String),
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Mismatch => 1,
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Mismatch => write!(f, "verification mismatch"),
            Failure::Config(m) => write!(f, "config error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<sigmak_core::Error> for Failure {
    fn from(e: sigmak_core::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub kind: FamilyKind,
    #[serde(default = "default_k")]
    pub k: u32,
    pub ell: u32,
    /// Required for k = 3; k = 2 always uses case 1.
    #[serde(default)]
    pub case_index: Option<u32>,
    pub param: f64,
}

fn default_k() -> u32 {
    2
}

/// Closed-form replacements for the default factor spectrum.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FactorConfig {
    FlatTorus { periods: Vec<f64> },
    SyntheticWeyl { volume: f64, count: usize },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexConfig {
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default = "default_dtn_tol")]
    pub dtn_tol: f64,
}

fn default_margin() -> f64 {
    IndexOptions::default().margin
}

fn default_dtn_tol() -> f64 {
    dtn::DEFAULT_TOL
}

impl Default for IndexConfig {
    fn default() -> Self {
        IndexConfig { tol: None, margin: default_margin(), dtn_tol: default_dtn_tol() }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub param_lo: f64,
    pub param_hi: f64,
    pub steps: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DtnConfig {
    /// Level index on each boundary factor, in factor order.
    pub degrees: Vec<u64>,
    #[serde(default = "default_dtn_tol")]
    pub tol: f64,
}

/// One JSON document holding every input of a run.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub family: FamilyConfig,
    /// JSON spectrum list for the factor without a closed form; relative
    /// paths resolve against the config file's directory.
    #[serde(default)]
    pub spectrum_file: Option<PathBuf>,
    #[serde(default)]
    pub factor_spectrum: Option<FactorConfig>,
    #[serde(default)]
    pub index: IndexConfig,
    #[serde(default)]
    pub scan: Option<ScanConfig>,
    #[serde(default)]
    pub dtn: Option<DtnConfig>,
}

/// A parsed config with its spectrum resolved to a validated family.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub config: RunConfig,
    pub spec: FamilySpec,
}

impl Resolved {
    pub fn index_options(&self) -> IndexOptions {
        IndexOptions { tol: self.config.index.tol, margin: self.config.index.margin, dtn_tol: self.config.index.dtn_tol }
    }
}

pub fn load_config(path: &Path) -> Result<Resolved, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text, path.parent().unwrap_or(Path::new(".")))
}

pub fn parse_config(text: &str, base_dir: &Path) -> Result<Resolved, Failure> {
    let config: RunConfig =
        serde_json::from_str(text).map_err(|e| Failure::Config(format!("config: {e}")))?;
    if config.schema_version != SCHEMA_VERSION {
        return Err(Failure::Config(format!(
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            config.schema_version
        )));
    }
    let f = &config.family;
    let case_index = match (f.k, f.case_index) {
        (2, None) => 1,
        (_, Some(c)) => c,
        (k, None) => return Err(Failure::Config(format!("family.case_index is required for k = {k}"))),
    };
    let mut spec = FamilySpec::new(f.kind, f.k, f.ell, case_index, f.param);
    let (_, m) = families::dims(f.kind, f.k, f.ell, case_index)?;
    let spectrum = match (&config.spectrum_file, &config.factor_spectrum) {
        (Some(_), Some(_)) => {
            return Err(Failure::Config("give at most one of spectrum_file and factor_spectrum".into()))
        }
        (Some(p), None) => {
            let full = base_dir.join(p);
            let text = std::fs::read_to_string(&full)
                .map_err(|e| Failure::Config(format!("cannot read spectrum file {}: {e}", full.display())))?;
            let label = p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Some(FactorSpectrum::from_json(&label, &text).map_err(|e| {
                Failure::Config(format!("{}: {e}", full.display()))
            })?)
        }
        (None, Some(FactorConfig::FlatTorus { periods })) => {
            if f.kind != FamilyKind::FlatWarped || periods.len() + 1 != m {
                return Err(Failure::Config(format!(
                    "flat_torus needs the flat-warped family and {} periods",
                    m.saturating_sub(1)
                )));
            }
            Some(FactorSpectrum::flat_torus(periods.clone())?)
        }
        (None, Some(FactorConfig::SyntheticWeyl { volume, count })) => {
            if f.kind != FamilyKind::SphereHyperbolic {
                return Err(Failure::Config("synthetic_weyl applies to the sphere-hyperbolic family".into()));
            }
            Some(FactorSpectrum::synthetic_weyl(m, *volume, *count)?)
        }
        (None, None) => None,
    };
    if let Some(s) = spectrum {
        spec = spec.with_factor_spectrum(s);
    }
    spec.validate()?;
    Ok(Resolved { config, spec })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub schema_version: u32,
    pub command: String,
    pub result: T,
}

fn envelope<T: Serialize>(command: &str, result: T) -> Result<String, Failure> {
    Ok(report::to_json(&Envelope { schema_version: SCHEMA_VERSION, command: command.into(), result })?)
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyRow {
    pub quantity: String,
    pub computed: String,
    pub reference: String,
    pub status: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub family: FamilyKind,
    pub k: u32,
    pub ell: u32,
    pub case_index: u32,
    pub param: f64,
    pub rows: Vec<VerifyRow>,
    pub all_ok: bool,
}

fn show(v: &BigRational) -> String {
    let s = v.to_string();
    if s.len() <= 40 {
        s
    } else {
        fmt_f64(symalg::Scalar::to_f64(v))
    }
}

fn status(ok: bool) -> String {
    if ok { "OK" } else { "FAIL" }.into()
}

fn exact_row(quantity: String, computed: &BigRational, reference: &BigRational) -> VerifyRow {
    VerifyRow { quantity, computed: show(computed), reference: show(reference), status: status(computed == reference) }
}

fn block_rows(rows: &mut Vec<VerifyRow>, name: &str, got: &IsoSpectrum<BigRational>, want: &IsoSpectrum<BigRational>) {
    if got.mults() != want.mults() {
        rows.push(VerifyRow {
            quantity: format!("{name} multiplicities"),
            computed: format!("{:?}", got.mults()),
            reference: format!("{:?}", want.mults()),
            status: status(false),
        });
        return;
    }
    for (i, (g, w)) in got.blocks.iter().zip(&want.blocks).enumerate() {
        rows.push(exact_row(format!("{name}[{i}] (mult {})", g.mult), &g.value, &w.value));
    }
}

/// Interior table, boundary invariants and (for the warped family) the
/// Einstein defect, each computed twice independently.
pub fn verify(spec: &FamilySpec) -> Result<VerifyReport, Failure> {
    spec.validate()?;
    let k = spec.k as usize;
    let (n, m) = families::dims(spec.kind, spec.k, spec.ell, spec.case_index)?;
    let mut rows = Vec::new();

    let table = families::product_table(spec.case_index, spec.ell)?;
    let interior = families::interior_schouten::<BigRational>(spec.kind, n, m);
    for j in 1..=k {
        let got = symalg::sigma(j, &interior);
        rows.push(exact_row(format!("interior sigma_{j}"), &got, &table.sigmas[j - 1]));
    }
    let newton = symalg::newton(k - 1, &interior);
    block_rows(&mut rows, &format!("interior T_{}", k - 1), &newton, &table.newton);

    // exact rational image of the float curvature parameter
    let curv_f = families::curvature_parameter(spec)?;
    let curv = BigRational::from_f64(curv_f)
        .ok_or_else(|| Failure::Numerical(format!("curvature parameter {curv_f} is not finite")))?;
    let (p, a) = families::boundary_blocks::<BigRational>(spec.kind, n, m, &curv);
    let got: BoundaryInvariants<BigRational> = boundary::boundary_invariants(k, &p, &a)?;
    let want = boundary::reference_values::<BigRational>(spec.kind, k, n, m, &curv)?;
    rows.push(exact_row(format!("H_{k}"), &got.h_k, &want.h_k));
    block_rows(&mut rows, &format!("S_{}", k - 1), &got.s_blocks, &want.s_blocks);

    if spec.kind == FamilyKind::FlatWarped {
        let (lo, hi, count) = DEFECT_GRID;
        let grid: Vec<f64> = (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect();
        let defect = families::einstein_defect(m, &grid)?;
        rows.push(VerifyRow {
            quantity: format!("einstein defect on [{lo}, {hi}]"),
            computed: fmt_f64(defect),
            reference: format!("< {}", fmt_f64(DEFECT_TOL)),
            status: status(defect < DEFECT_TOL),
        });
    }
    let all_ok = rows.iter().all(|r| r.status == "OK");
    Ok(VerifyReport {
        family: spec.kind,
        k: spec.k,
        ell: spec.ell,
        case_index: spec.case_index,
        param: spec.param,
        rows,
        all_ok,
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn verify_csv(r: &VerifyReport) -> String {
    let mut out = String::from("quantity,computed,reference,status\n");
    for row in &r.rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            csv_field(&row.quantity),
            csv_field(&row.computed),
            csv_field(&row.reference),
            row.status
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// dtn
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DtnReport {
    pub family: FamilyKind,
    pub k: u32,
    pub ell: u32,
    pub case_index: u32,
    pub param: f64,
    pub spectrum_source: String,
    pub tol: f64,
    pub mode: BoundaryMode,
    pub dtn: f64,
    pub method: DtnMethod,
    pub agreement: f64,
    /// Jacobi eigenvalue of the mode.
    pub lambda_df: f64,
    pub greens_residual: f64,
}

pub fn single_mode(spec: &FamilySpec, cfg: &DtnConfig) -> Result<DtnReport, Failure> {
    let model = families::build_model(spec)?;
    let mode = jacobi::mode_at(&model, &cfg.degrees)?;
    let shift = (2.0 * spec.k as f64 - 1.0) * model.h_k;
    let tangential: f64 = model.s_blocks.values().iter().zip(&mode.lambdas).map(|(s, l)| s * l).sum();
    let (sol, residual) = if mode.is_constant() {
        (dtn::DtnSolution { value: 0.0, method: DtnMethod::Exact, agreement: 0.0 }, 0.0)
    } else {
        let prob = dtn::build_radial_problem(&model, &mode)?;
        (dtn::solve_dtn_detailed(&prob, cfg.tol)?, dtn::greens_residual(&prob, cfg.tol)?)
    };
    Ok(DtnReport {
        family: spec.kind,
        k: spec.k,
        ell: spec.ell,
        case_index: spec.case_index,
        param: spec.param,
        spectrum_source: model.spectrum_label(),
        tol: cfg.tol,
        lambda_df: sol.value + tangential - shift,
        dtn: sol.value,
        method: sol.method,
        agreement: sol.agreement,
        greens_residual: residual,
        mode,
    })
}

pub fn dtn_csv(r: &DtnReport) -> String {
    let degrees: Vec<String> = r.mode.degrees.iter().map(|d| d.to_string()).collect();
    let lambdas: Vec<String> = r.mode.lambdas.iter().map(|l| fmt_f64(*l)).collect();
    let method = serde_json::to_value(r.method).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    format!(
        "degrees,lambdas,dtn,Lambda,mult,method,agreement,greens_residual\n{},{},{},{},{},{},{},{}\n",
        degrees.join(";"),
        lambdas.join(";"),
        fmt_f64(r.dtn),
        fmt_f64(r.lambda_df),
        r.mode.mult,
        method,
        fmt_f64(r.agreement),
        fmt_f64(r.greens_residual)
    )
}

// ---------------------------------------------------------------------------
// dispatch
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Verify,
    Index,
    Scan,
    Dtn,
}

/// Rendered output of a command, plus whether it counts as a mismatch.
pub struct Output {
    pub text: String,
    pub mismatch: bool,
}

pub fn run(command: Command, resolved: &Resolved, format: Format) -> Result<Output, Failure> {
    let spec = &resolved.spec;
    let (text, mismatch) = match command {
        Command::Verify => {
            let r = verify(spec)?;
            let text = match format {
                Format::Json => envelope("verify", &r)?,
                Format::Csv => verify_csv(&r),
            };
            (text, !r.all_ok)
        }
        Command::Index => {
            let r: JacobiReport = jacobi::morse_index(spec, &resolved.index_options())?;
            let text = match format {
                Format::Json => envelope("index", &r)?,
                Format::Csv => report::report_csv(&r),
            };
            (text, false)
        }
        Command::Scan => {
            let cfg = resolved.config.scan.as_ref().ok_or_else(|| Failure::Config("scan section missing".into()))?;
            let r: ScanResult = jacobi::scan(spec, cfg.param_lo, cfg.param_hi, cfg.steps, &resolved.index_options())?;
            let text = match format {
                Format::Json => envelope("scan", &r)?,
                Format::Csv => report::scan_csv(&r),
            };
            (text, false)
        }
        Command::Dtn => {
            let cfg = resolved.config.dtn.as_ref().ok_or_else(|| Failure::Config("dtn section missing".into()))?;
            let r = single_mode(spec, cfg)?;
            let text = match format {
                Format::Json => envelope("dtn", &r)?,
                Format::Csv => dtn_csv(&r),
            };
            (text, false)
        }
    };
    Ok(Output { text, mismatch })
}
