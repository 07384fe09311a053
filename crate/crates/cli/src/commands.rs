use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use eopm::classical_pm::{carson_window, DEFAULT_SAFETY};
use eopm::modes::{mode_of_frequency, QuantizationFrame};
use eopm::multitone::{
    combined_oracle, max_deviation, minimum_combined_window, multitone_large_carrier, multitone_small_m,
    total_probability, two_tone_spectrum, ToneSet,
};
use eopm::oracle::{adjoint_expansion, forbidden_path_corrected, minimum_window, oracle_column};
use eopm::scattering::{d_coefficient, naive_scatter_single_photon, scatter_single_photon, unitarity_defect};
use eopm::{Complex64, ModeIndex, ModulationTone, ModulatorSpec, SpectrumLine};
use rayon::prelude::*;

use crate::cli::{
    CarrierArgs, Command, Common, CompareArgs, Format, MultitoneArgs, MultitoneModel, OracleCheckArgs, OracleKind,
    SpectrumArgs, SpectrumModel, ToneArgs, UnitarityArgs,
};
use crate::failure::Failure;
use crate::table::{write_to, Cell, Document};

/// Outcome of a run that produced its output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    CheckFailed,
}

pub const MAX_TONES: usize = 8;

const SPECTRUM_COLUMNS: [&str; 6] = ["mode", "q_offset", "amp_re", "amp_im", "prob", "physical"];

pub fn run(command: &Command) -> Result<Verdict, Failure> {
    match command {
        Command::Spectrum(args) => spectrum(args),
        Command::Unitarity(args) => unitarity(args),
        Command::OracleCheck(args) => oracle_check(args),
        Command::Multitone(args) => multitone(args),
        Command::ClassicalCompare(args) => classical_compare(args),
    }
}

fn name<T: ValueEnum>(value: &T) -> String {
    value
        .to_possible_value()
        .map(|v| v.get_name().to_string())
        .unwrap_or_default()
}

fn format_name(format: Format) -> String {
    name(&format)
}

/// Integral values as integers, everything else in exponent form.
fn real(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn reals(values: &[f64]) -> String {
    values.iter().map(|&v| real(v)).collect::<Vec<_>>().join(",")
}

struct Settings(BTreeMap<String, String>);

impl Settings {
    fn new(common: &Common) -> Self {
        Settings(BTreeMap::from([("format".to_string(), format_name(common.format))]))
    }

    fn set(&mut self, key: &str, value: impl ToString) {
        self.0.insert(key.to_string(), value.to_string());
    }

    fn tone(&mut self, tone: &ToneArgs) {
        self.set("m", real(tone.m));
        self.set("theta", real(tone.theta));
        self.set("phi-b", real(tone.phi_b));
        self.set("N", tone.step);
    }
}

fn finish(doc: &Document, common: &Common) -> Result<(), Failure> {
    write_to(common.output.as_deref(), &doc.render(common.format)?)
}

fn input_mode(carrier: &CarrierArgs, settings: &mut Settings) -> Result<ModeIndex, Failure> {
    let n0 = match (carrier.n0, carrier.omega0) {
        (Some(_), Some(_)) => return Err(Failure::Config("give either --n0 or --omega0, not both".into())),
        (Some(n0), None) => ModeIndex::new(n0)?,
        (None, Some(omega0)) => {
            let (Some(length), Some(speed)) = (carrier.length, carrier.speed) else {
                return Err(Failure::Config("--omega0 needs --length and --speed".into()));
            };
            let frame = QuantizationFrame::new(length, speed)?;
            settings.set("omega0", real(omega0));
            settings.set("length", real(length));
            settings.set("speed", real(speed));
            mode_of_frequency(omega0, &frame)?
        }
        (None, None) => return Err(Failure::Config("the input mode needs --n0 or --omega0".into())),
    };
    settings.set("n0", n0);
    Ok(n0)
}

fn single_tone(tone: &ToneArgs) -> Result<ModulatorSpec, Failure> {
    Ok(ModulatorSpec::from_parts(tone.m, tone.theta, tone.step, tone.phi_b)?)
}

fn offset(mode: i64, n0: ModeIndex, step: u64) -> i64 {
    (mode - n0.as_i64()) / step as i64
}

fn line_cells(mode: i64, q_offset: i64, amplitude: Complex64, probability: f64, physical: bool) -> Vec<Cell> {
    vec![
        Cell::Int(mode),
        Cell::Int(q_offset),
        Cell::Float(amplitude.re),
        Cell::Float(amplitude.im),
        Cell::Float(probability),
        Cell::Bool(physical),
    ]
}

fn naive_window(requested: Option<usize>, m: f64, settings: &mut Settings) -> usize {
    let window = requested.unwrap_or_else(|| carson_window(m, DEFAULT_SAFETY));
    settings.set("q-window", window);
    window
}

fn spectrum(args: &SpectrumArgs) -> Result<Verdict, Failure> {
    let mut settings = Settings::new(&args.common);
    let n0 = input_mode(&args.carrier, &mut settings)?;
    let spec = single_tone(&args.tone)?;
    settings.tone(&args.tone);
    settings.set("model", name(&args.model));
    let step = spec.step();

    let rows: Vec<Vec<Cell>> = match args.model {
        SpectrumModel::Quantum => {
            settings.set("tail-tol", real(args.tail_tol));
            scatter_single_photon(n0, &spec, args.tail_tol)?
                .iter()
                .map(|l| {
                    let mode = l.mode.as_i64();
                    line_cells(mode, offset(mode, n0, step), l.amplitude, l.probability, true)
                })
                .collect()
        }
        SpectrumModel::ClassicalNaive => {
            let window = naive_window(args.q_window, spec.index(), &mut settings);
            naive_scatter_single_photon(n0, &spec, window)?
                .iter()
                .map(|l| line_cells(l.mode, l.order, l.amplitude, l.probability, l.physical))
                .collect()
        }
    };
    let mut doc = Document::new("spectrum", settings.0, &SPECTRUM_COLUMNS);
    rows.into_iter().for_each(|row| doc.push(row));
    finish(&doc, &args.common)?;
    Ok(Verdict::Pass)
}

fn classical_compare(args: &CompareArgs) -> Result<Verdict, Failure> {
    let mut settings = Settings::new(&args.common);
    let n0 = input_mode(&args.carrier, &mut settings)?;
    let spec = single_tone(&args.tone)?;
    settings.tone(&args.tone);
    settings.set("tail-tol", real(args.tail_tol));
    let window = naive_window(args.q_window, spec.index(), &mut settings);

    let zero = Complex64::new(0.0, 0.0);
    let mut joined: BTreeMap<i64, (Complex64, Complex64)> = BTreeMap::new();
    for line in naive_scatter_single_photon(n0, &spec, window)? {
        joined.entry(line.mode).or_insert((zero, zero)).0 = line.amplitude;
    }
    for line in scatter_single_photon(n0, &spec, args.tail_tol)? {
        joined.entry(line.mode.as_i64()).or_insert((zero, zero)).1 = line.amplitude;
    }

    let mut doc = Document::new(
        "classical-compare",
        settings.0,
        &[
            "mode",
            "q_offset",
            "naive_re",
            "naive_im",
            "naive_prob",
            "quantum_re",
            "quantum_im",
            "quantum_prob",
            "physical",
            "prob_diff",
        ],
    );
    for (mode, (naive, quantum)) in joined {
        let (p_naive, p_quantum) = (naive.norm_sqr(), quantum.norm_sqr());
        doc.push(vec![
            Cell::Int(mode),
            Cell::Int(offset(mode, n0, spec.step())),
            Cell::Float(naive.re),
            Cell::Float(naive.im),
            Cell::Float(p_naive),
            Cell::Float(quantum.re),
            Cell::Float(quantum.im),
            Cell::Float(p_quantum),
            Cell::Bool(mode >= 1),
            Cell::Float(p_quantum - p_naive),
        ]);
    }
    finish(&doc, &args.common)?;
    Ok(Verdict::Pass)
}

fn check_threshold(name: &str, value: f64) -> Result<(), Failure> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Failure::Config(format!("--{name} must be finite and non-negative, got {value}")))
    }
}

fn unitarity(args: &UnitarityArgs) -> Result<Verdict, Failure> {
    let spec = single_tone(&args.tone)?;
    check_threshold("threshold", args.threshold)?;
    if args.p0_max < 1 || args.q0_max < 1 {
        return Err(Failure::Config("--p0-max and --q0-max must be at least 1".into()));
    }
    let q_max = args
        .q_max
        .unwrap_or_else(|| carson_window(spec.index(), DEFAULT_SAFETY) + args.p0_max.max(args.q0_max) as usize);
    let mut settings = Settings::new(&args.common);
    settings.tone(&args.tone);
    settings.set("p0-max", args.p0_max);
    settings.set("q0-max", args.q0_max);
    settings.set("q-max", q_max);
    settings.set("threshold", real(args.threshold));

    let grid: Vec<(i64, i64)> = (1..=args.p0_max)
        .flat_map(|p0| (1..=args.q0_max).map(move |q0| (p0, q0)))
        .collect();
    let defects = grid
        .par_iter()
        .map(|&(p0, q0)| unitarity_defect(p0, q0, &spec, q_max))
        .collect::<Result<Vec<f64>, _>>()?;

    let mut doc = Document::new("unitarity", settings.0, &["p0", "q0", "defect", "pass"]);
    let mut verdict = Verdict::Pass;
    for (&(p0, q0), &defect) in grid.iter().zip(&defects) {
        let pass = defect <= args.threshold;
        if !pass {
            verdict = Verdict::CheckFailed;
        }
        doc.push(vec![Cell::Int(p0), Cell::Int(q0), Cell::Float(defect), Cell::Bool(pass)]);
    }
    finish(&doc, &args.common)?;
    Ok(verdict)
}

/// Largest `|D_{q,q0} - oracle|` over `q = 1..=q_max`.
fn oracle_deviation(args: &OracleCheckArgs, m: f64, step: u64, q0: i64) -> Result<f64, Failure> {
    let spec = ModulatorSpec::from_parts(m, args.theta, step, args.phi_b)?;
    let closed: Vec<Complex64> = (1..=args.q_max)
        .map(|q| d_coefficient(q, q0, &spec))
        .collect::<Result<_, _>>()?;
    let reference: Vec<Complex64> = match args.oracle {
        OracleKind::MatrixExp => {
            let n0 = ModeIndex::new(q0 * step as i64 - args.r0 as i64)?;
            let size = minimum_window(n0, &spec).max(args.q_max as usize * step as usize);
            let column = oracle_column(n0, &spec, size)?;
            (1..=args.q_max)
                .map(|q| column[(q * step as i64 - args.r0 as i64 - 1) as usize])
                .collect()
        }
        OracleKind::PathSum => (1..=args.q_max)
            .map(|q| Ok(spec.bias_factor() * forbidden_path_corrected(q, q0, &spec, args.s_max)?))
            .collect::<Result<_, eopm::Error>>()?,
        OracleKind::Adjoint => {
            let series = |shift: i64| adjoint_expansion(shift, &spec, shift.unsigned_abs() + 2 * args.s_max);
            (1..=args.q_max)
                .map(|q| {
                    let swap = Complex64::from_polar(1.0, 2.0 * spec.tone.phase() * q as f64);
                    Ok(series(q - q0)? - swap * series(-q - q0)?)
                })
                .collect::<Result<_, eopm::Error>>()?
        }
    };
    Ok(closed
        .iter()
        .zip(&reference)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, |acc, d| if d.is_nan() || acc.is_nan() { f64::NAN } else { acc.max(d) }))
}

fn oracle_check(args: &OracleCheckArgs) -> Result<Verdict, Failure> {
    check_threshold("tolerance", args.tolerance)?;
    if args.q_max < 1 {
        return Err(Failure::Config("--q-max must be at least 1".into()));
    }
    if let Some(q0) = args.q0.0.iter().find(|&&q0| q0 < 1) {
        return Err(Failure::Config(format!("--q0 values must be at least 1, got {q0}")));
    }
    if let Some(step) = args.step.0.iter().find(|&&n| n <= args.r0) {
        return Err(Failure::Config(format!("--r0 {} must be below every --N, got N = {step}", args.r0)));
    }
    let mut settings = Settings::new(&args.common);
    settings.set("m", reals(&args.m.0));
    settings.set("N", &args.step);
    settings.set("q0", &args.q0);
    settings.set("theta", real(args.theta));
    settings.set("phi-b", real(args.phi_b));
    settings.set("q-max", args.q_max);
    settings.set("oracle", name(&args.oracle));
    settings.set("tolerance", real(args.tolerance));
    match args.oracle {
        OracleKind::MatrixExp => settings.set("r0", args.r0),
        OracleKind::PathSum | OracleKind::Adjoint => settings.set("s-max", args.s_max),
    }

    let grid: Vec<(f64, u64, i64)> = args
        .m
        .0
        .iter()
        .flat_map(|&m| {
            args.step
                .0
                .iter()
                .flat_map(move |&n| args.q0.0.iter().map(move |&q0| (m, n, q0)))
        })
        .collect();
    let deviations = grid
        .par_iter()
        .map(|&(m, step, q0)| oracle_deviation(args, m, step, q0))
        .collect::<Result<Vec<f64>, Failure>>()?;

    let mut doc = Document::new("oracle-check", settings.0, &["m", "N", "q0", "max_deviation", "pass"]);
    let mut verdict = Verdict::Pass;
    for (&(m, step, q0), &deviation) in grid.iter().zip(&deviations) {
        let pass = deviation <= args.tolerance;
        if !pass {
            verdict = Verdict::CheckFailed;
        }
        doc.push(vec![
            Cell::Float(m),
            Cell::Int(step as i64),
            Cell::Int(q0),
            Cell::Float(deviation),
            Cell::Bool(pass),
        ]);
    }
    finish(&doc, &args.common)?;
    Ok(verdict)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn sidecar_path(output: &Path, format: Format) -> PathBuf {
    let stem = output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    output.with_file_name(format!("{stem}.deviation.{}", format_name(format)))
}

fn multitone(args: &MultitoneArgs) -> Result<Verdict, Failure> {
    let count = args.tones.0.len();
    if count > MAX_TONES {
        return Err(Failure::Config(format!("at most {MAX_TONES} tones are supported, got {count}")));
    }
    let tones = args
        .tones
        .0
        .iter()
        .map(|t| ModulationTone::new(t.m, t.theta, t.step))
        .collect::<Result<Vec<_>, _>>()?;
    let set = ToneSet::new(tones, args.phi_b)?;
    let n0 = ModeIndex::new(args.n0)?;
    let window = args.window.unwrap_or_else(|| minimum_combined_window(n0, &set));

    let mut settings = Settings::new(&args.common);
    settings.set("n0", n0);
    settings.set("tones", &args.tones);
    settings.set("phi-b", real(args.phi_b));
    settings.set("model", name(&args.model));
    settings.set("window", window);

    let lines: Vec<SpectrumLine> = match args.model {
        MultitoneModel::TwoToneFactored => {
            settings.set("tail-tol", real(args.tail_tol));
            match set.tones() {
                [tone] => scatter_single_photon(n0, &ModulatorSpec::new(*tone, args.phi_b)?, args.tail_tol)?,
                [_, _] => two_tone_spectrum(n0, &set, args.tail_tol)?,
                _ => {
                    return Err(Failure::Config(format!(
                        "two-tone-factored takes one or two tones, got {count}"
                    )))
                }
            }
        }
        MultitoneModel::LargeCarrier => {
            let q_window = naive_window(args.q_window, set.max_index(), &mut settings);
            multitone_large_carrier(n0, &set, q_window)?
        }
        MultitoneModel::SmallM => multitone_small_m(n0, &set)?,
        MultitoneModel::Oracle => combined_oracle(n0, &set, window)?
            .into_iter()
            .zip(1i64..)
            .filter(|(a, _)| *a != Complex64::new(0.0, 0.0))
            .map(|(a, n)| Ok(SpectrumLine::new(ModeIndex::new(n)?, a)))
            .collect::<Result<_, eopm::Error>>()?,
    };

    let step = set.tones().iter().map(|t| t.step()).fold(0, gcd);
    let mut doc = Document::new("multitone", settings.0.clone(), &SPECTRUM_COLUMNS);
    for line in &lines {
        let mode = line.mode.as_i64();
        doc.push(line_cells(mode, offset(mode, n0, step), line.amplitude, line.probability, true));
    }

    let report = if args.model == MultitoneModel::Oracle {
        None
    } else {
        let exact = combined_oracle(n0, &set, window)?;
        let mut report = Document::new("multitone", settings.0, &["max_deviation", "total_probability"]);
        report.push(vec![
            Cell::Float(max_deviation(&lines, &exact)),
            Cell::Float(total_probability(&lines)),
        ]);
        Some(report)
    };

    finish(&doc, &args.common)?;
    if let Some(report) = report {
        let bytes = report.render(args.common.format)?;
        match &args.common.output {
            Some(path) => write_to(Some(&sidecar_path(path, args.common.format)), &bytes)?,
            None => eprint!("{}", String::from_utf8_lossy(&bytes)),
        }
    }
    Ok(Verdict::Pass)
}
