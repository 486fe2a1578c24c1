use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use simba::calibration::{amplitude_grid, characterize, run_characterization_sweep, Exclusion, SweepDataset};
use simba::dynamics::{swap_peaks, swap_scan, write_shots_csv, write_trajectory_csv, Engine, QubitState};
use simba::measurement::{readout_fidelity, HistogramPair};
use simba::rng::SeedStream;
use simba::{Calibration, Error, Setup};

use crate::manifest::ManifestWriter;
use crate::{Command, Common, EXIT_DOMAIN, EXIT_IO};

pub const SWAP_CSV: &str = "swap_scan.csv";
pub const SWEEP_CSV: &str = "sweep.csv";
pub const RESULT_JSON: &str = "result.json";
pub const SUMMARY_TXT: &str = "summary.txt";
pub const SHOTS_CSV: &str = "shots.csv";
pub const HISTOGRAM_CSV: &str = "histograms.csv";

/// Smallest amplitude sweep worth fitting.
pub const MIN_POINTS: usize = 8;
/// Effective photon number of the projective readout point.
pub const PROJECTIVE_PHOTONS: f64 = 2.4;

const BOOTSTRAP_TAG: u64 = 0xB0;

pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) | Error::Json(_) | Error::Csv(_) | Error::Schema(_) => EXIT_IO,
            _ => EXIT_DOMAIN,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e).into()
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_IO,
        message: message.into(),
    }
}

fn read_input(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn parse_setup(path: &Path, bytes: &[u8]) -> Result<Setup, Failure> {
    let text = std::str::from_utf8(bytes).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Setup::from_json(text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_valid(path: &Path) -> Result<(Setup, Vec<u8>), Failure> {
    let bytes = read_input(path)?;
    let setup = parse_setup(path, &bytes)?;
    setup.ensure_valid()?;
    Ok((setup, bytes))
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Failure> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Run `body` between writing the manifest and finalising it.
fn with_manifest(
    name: &str,
    input: &Path,
    bytes: &[u8],
    seed: u64,
    out_dir: &Path,
    body: impl FnOnce(&mut ManifestWriter) -> Result<(), Failure>,
) -> Result<i32, Failure> {
    let mut m = ManifestWriter::begin(name, input, bytes, seed, out_dir)?;
    match body(&mut m) {
        Ok(()) => {
            let code = if m.manifest.partial { EXIT_DOMAIN } else { 0 };
            m.finish(None)?;
            Ok(code)
        }
        Err(f) => {
            m.finish(Some(f.message.clone()))?;
            Err(f)
        }
    }
}

pub fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::Validate { config } => validate(&config, out),
        Command::SwapScan {
            common,
            from_ns,
            to_ns,
            step_ns,
            shots,
            photons,
        } => swap(&common, from_ns, to_ns, step_ns, shots, photons, out),
        Command::Characterize {
            common,
            eps_max,
            points,
            shots,
            resamples,
        } => sweep(&common, eps_max, points, shots, resamples, out),
        Command::Fit {
            dataset,
            seed,
            out_dir,
            resamples,
        } => fit(&dataset, seed, &out_dir, resamples, out),
        Command::Trajectory { common, photons } => trajectory(&common, photons, out),
        Command::Shots { common, shots, photons } => shots_cmd(&common, shots, photons, out),
    }
}

fn validate(path: &Path, out: &mut dyn Write) -> Result<i32, Failure> {
    let bytes = read_input(path)?;
    let setup = parse_setup(path, &bytes)?;
    let violations = setup.violations();
    for v in &violations {
        writeln!(out, "{v}")?;
    }
    if violations.is_empty() {
        writeln!(out, "{}: ok", path.display())?;
        Ok(0)
    } else {
        Ok(EXIT_DOMAIN)
    }
}

/// Schedule whose drive produces `photons` effective photons.
fn at_photons(setup: &Setup, photons: f64) -> Result<(Engine<f64>, f64), Failure> {
    if !(photons >= 0.0) {
        return Err(usage(format!("photons must be >= 0, got {photons}")));
    }
    let engine = Engine::new(&setup.config, &setup.schedule)?;
    let eps = engine.budget().epsilon_for_photons(photons);
    Ok((engine.with_amplitude(eps), eps))
}

pub fn swap_durations(from_ns: f64, to_ns: f64, step_ns: f64) -> Result<Vec<f64>, Failure> {
    if !(step_ns > 0.0) {
        return Err(usage(format!("--step-ns must be > 0, got {step_ns}")));
    }
    if !(from_ns > 0.0) || !(to_ns >= from_ns) {
        return Err(usage(format!("need 0 < --from-ns <= --to-ns, got {from_ns}..{to_ns}")));
    }
    let n = ((to_ns - from_ns) / step_ns + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| from_ns + k as f64 * step_ns).collect())
}

fn swap(
    c: &Common,
    from_ns: f64,
    to_ns: f64,
    step_ns: f64,
    shots: usize,
    photons: f64,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let durations = swap_durations(from_ns, to_ns, step_ns)?;
    let (setup, bytes) = load_valid(&c.config)?;
    with_manifest("swap-scan", &c.config, &bytes, c.seed, &c.out_dir, |m| {
        let (engine, _) = at_photons(&setup, photons)?;
        let scan = swap_scan(&setup.config, engine.schedule(), &durations, shots, c.seed)?;
        let mut w = csv::Writer::from_writer(create(&c.out_dir, SWAP_CSV)?);
        w.write_record(["duration_ns", "fr", "stderr"]).map_err(Error::from)?;
        for p in &scan {
            w.write_record(&[p.duration_ns.to_string(), p.fidelity.to_string(), p.stderr.to_string()])
                .map_err(Error::from)?;
        }
        w.flush()?;
        m.manifest.outputs.push(SWAP_CSV.into());
        let peaks = swap_peaks(&scan);
        let list: Vec<String> = peaks.iter().map(|p| format!("{p:.2}")).collect();
        writeln!(out, "fidelity maxima (ns): {}", list.join(", "))?;
        match peaks.as_slice() {
            [a, b, ..] => writeln!(out, "swap period: {:.2} ns", b - a)?,
            _ => writeln!(out, "swap period: fewer than two maxima in range")?,
        }
        Ok(())
    })
}

fn bootstrap_seed(seed: u64) -> u64 {
    SeedStream::new(seed).child(BOOTSTRAP_TAG).seed(0)
}

fn write_result(
    dir: &Path,
    ds: &SweepDataset<f64>,
    seed: u64,
    resamples: usize,
    m: &mut ManifestWriter,
) -> Result<Calibration, Failure> {
    let result = characterize(ds, Exclusion::default(), resamples, bootstrap_seed(seed))?;
    fs::write(dir.join(RESULT_JSON), result.to_json() + "\n")?;
    fs::write(dir.join(SUMMARY_TXT), result.summary_table())?;
    m.manifest.outputs.extend([RESULT_JSON.into(), SUMMARY_TXT.into()]);
    Ok(result)
}

fn sweep(
    c: &Common,
    eps_max: Option<f64>,
    points: usize,
    shots: usize,
    resamples: usize,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    if points < MIN_POINTS {
        return Err(usage(format!("--points must be at least {MIN_POINTS}, got {points}")));
    }
    if let Some(e) = eps_max.filter(|e| !(*e > 0.0)) {
        return Err(usage(format!("--eps-max must be > 0, got {e}")));
    }
    let (setup, bytes) = load_valid(&c.config)?;
    with_manifest("characterize", &c.config, &bytes, c.seed, &c.out_dir, |m| {
        let engine = Engine::new(&setup.config, &setup.schedule)?;
        let budget = engine.budget().clone();
        let eps_max = eps_max.unwrap_or_else(|| budget.epsilon_for_photons(PROJECTIVE_PHOTONS));
        let grid = amplitude_grid(eps_max, points);
        let ds = run_characterization_sweep(&setup, &grid, shots, c.seed)?;
        ds.write_csv(create(&c.out_dir, SWEEP_CSV)?)?;
        m.manifest.outputs.push(SWEEP_CSV.into());
        m.manifest.failed_points = ds.failed_points();
        m.manifest.partial = ds.failed_points() > 0;
        for (eps, reason) in ds.epsilons.iter().zip(&ds.failures) {
            if let Some(r) = reason {
                writeln!(out, "point eps = {eps} failed: {r}")?;
            }
        }
        let result = write_result(&c.out_dir, &ds, c.seed, resamples, m)?;
        write!(out, "{}", result.summary_table())?;
        let last = ds.len() - 1;
        let f = ds.fidelity[last];
        writeln!(
            out,
            "Projective point: n_r = {:.3}, F_r = {:.4} ± {:.4}",
            budget.n_r_per_eps2() * ds.epsilons[last].powi(2),
            f.fidelity,
            f.stderr
        )?;
        Ok(())
    })
}

fn fit(path: &Path, seed: u64, out_dir: &Path, resamples: usize, out: &mut dyn Write) -> Result<i32, Failure> {
    let bytes = read_input(path)?;
    let ds = SweepDataset::<f64>::read_csv(&bytes[..], 0)?;
    with_manifest("fit", path, &bytes, seed, out_dir, |m| {
        m.manifest.failed_points = ds.failed_points();
        let result = write_result(out_dir, &ds, seed, resamples, m)?;
        write!(out, "{}", result.summary_table())?;
        Ok(())
    })
}

fn trajectory(c: &Common, photons: f64, out: &mut dyn Write) -> Result<i32, Failure> {
    let (setup, bytes) = load_valid(&c.config)?;
    with_manifest("trajectory", &c.config, &bytes, c.seed, &c.out_dir, |m| {
        let (engine, eps) = at_photons(&setup, photons)?;
        for (q, name) in [
            (QubitState::Ground, "trajectory_g.csv"),
            (QubitState::Excited, "trajectory_e.csv"),
        ] {
            write_trajectory_csv(&engine.conditional(q)?, create(&c.out_dir, name)?)?;
            m.manifest.outputs.push(name.into());
        }
        writeln!(out, "drive amplitude eps = {eps}")?;
        Ok(())
    })
}

fn shots_cmd(c: &Common, n: usize, photons: f64, out: &mut dyn Write) -> Result<i32, Failure> {
    let (setup, bytes) = load_valid(&c.config)?;
    with_manifest("shots", &c.config, &bytes, c.seed, &c.out_dir, |m| {
        let (engine, eps) = at_photons(&setup, photons)?;
        let stream = SeedStream::new(c.seed);
        let g = engine.shots(QubitState::Ground, n, stream)?;
        let e = engine.shots(QubitState::Excited, n, stream)?;
        write_shots_csv(g.iter().chain(&e), create(&c.out_dir, SHOTS_CSV)?)?;
        let hist = HistogramPair::new(
            g.iter().map(|s| s.x_measured).collect(),
            e.iter().map(|s| s.x_measured).collect(),
        );
        hist.write_csv(create(&c.out_dir, HISTOGRAM_CSV)?)?;
        m.manifest.outputs.extend([SHOTS_CSV.into(), HISTOGRAM_CSV.into()]);
        writeln!(out, "drive amplitude eps = {eps}")?;
        if let Ok((f, s)) = readout_fidelity(&hist) {
            writeln!(out, "readout fidelity F_r = {f:.4} ± {s:.4}")?;
        }
        Ok(())
    })
}
