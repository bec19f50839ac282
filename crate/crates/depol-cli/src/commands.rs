//! The five subcommands. Human-readable summaries go to stdout as stable
//! `key: value` lines; machine-readable data goes to the output file.

use depol::process::{process_fidelity, ChiMatrix};
use depol::qstate::StokesVector;
use depol::tomography::{reconstruct_process, MLSettings};
use depol::rng::child_seed;

use crate::config::{Experiment, Format, Mode};
use crate::io::{read_chi, write_text, ChiFile, EllipsoidFile, EllipsoidPoint, SweepFile, SweepRow};
use crate::CliError;

fn recon_err(e: depol::Error) -> CliError {
    match e {
        depol::Error::UnphysicalStokes(_) | depol::Error::InvalidArgument(_) => {
            CliError::Usage(e.to_string())
        }
        other => CliError::Reconstruction(other),
    }
}

fn print_matrix4(label: &str, get: impl Fn(usize, usize) -> f64) {
    outln!("{label}:");
    for i in 0..4 {
        let row: Vec<String> = (0..4).map(|j| format!("{:>13.8}", get(i, j))).collect();
        outln!("  {}", row.join(" "));
    }
}

fn print_spectrum_lines(chi: &ChiMatrix) {
    let eigs = chi.eigenvalues();
    outln!(
        "eigenvalues: {} {} {} {}",
        eigs[0], eigs[1], eigs[2], eigs[3]
    );
    let radii = chi.ellipsoid_radii();
    outln!("radii: {} {} {}", radii[0], radii[1], radii[2]);
    outln!("unitality_residual: {}", chi.unitality_residual());
    outln!("tp_residual: {}", chi.tp_residual());
}

fn write_chi_if_requested(exp: &Experiment, chi: &ChiMatrix) -> Result<(), CliError> {
    if let Some(path) = &exp.out {
        let file = ChiFile::from_chi(chi);
        let text = match exp.effective_format() {
            Format::Json => file.to_json(),
            Format::Csv => file.to_csv(),
        };
        write_text(path, &text)?;
        outln!("wrote: {}", path.display());
    }
    Ok(())
}

/// Theoretical channel report at one angle.
pub fn cmd_channel(exp: &Experiment) -> Result<(), CliError> {
    if exp.mode != Mode::Theory {
        return Err(CliError::Usage(
            "channel is a theory-mode command; use `tomography` for reconstructions".into(),
        ));
    }
    let scheme = exp.require_scheme()?;
    let angle = exp.require_angle()?;
    let chi = scheme.channel(angle.radians()).chi();

    outln!("command: channel");
    outln!("scheme: {}", scheme.name());
    outln!("angle_degrees: {}", angle.degrees());
    print_spectrum_lines(&chi);
    print_matrix4("chi_re", |i, j| chi.matrix()[(i, j)].re);
    print_matrix4("chi_im", |i, j| chi.matrix()[(i, j)].im);
    let ptm = chi.to_ptm();
    print_matrix4("ptm", |i, j| ptm.matrix()[(i, j)]);
    write_chi_if_requested(exp, &chi)
}

/// One row per grid angle; stochastic modes reconstruct per row with a
/// deterministic child seed.
pub fn cmd_sweep(exp: &Experiment) -> Result<(), CliError> {
    let scheme = exp.require_scheme()?;
    let grid = exp.sweep.unwrap_or(crate::config::SweepGrid {
        start: 0.0,
        stop: 90.0,
        step: 2.5,
    });
    let angles = grid.angles()?;
    let out = exp
        .out
        .clone()
        .ok_or_else(|| CliError::Usage("sweep needs --out".into()))?;

    let stochastic = exp.mode != Mode::Theory;
    let seed = if stochastic { Some(exp.require_seed()?) } else { None };
    let inputs: Option<Vec<StokesVector>> = if stochastic {
        Some(exp.inputs_for_mode()?)
    } else {
        None
    };
    let settings = MLSettings::for_process();

    let mut rows = Vec::with_capacity(angles.len());
    for (idx, angle_degrees) in angles.iter().enumerate() {
        let channel = scheme.channel(angle_degrees.to_radians());
        let theory = channel.chi();
        let (chi, fidelity) = if let Some(mode) = exp.mode.reconstruction() {
            let rec = reconstruct_process(
                &channel,
                inputs.as_ref().expect("stochastic mode has inputs"),
                exp.exposure,
                child_seed(seed.expect("stochastic mode has a seed"), idx as u64),
                mode,
                &settings,
            )
            .map_err(recon_err)?;
            let f = process_fidelity(&rec, &theory).map_err(recon_err)?;
            (rec, Some(f))
        } else {
            (theory, None)
        };
        rows.push(SweepRow {
            angle_degrees: *angle_degrees,
            eigenvalues: chi.eigenvalues(),
            radii: chi.ellipsoid_radii(),
            unitality_residual: chi.unitality_residual(),
            fidelity_to_theory: fidelity,
        });
    }

    let file = SweepFile {
        scheme: scheme.name().to_string(),
        mode: exp.mode.name().to_string(),
        estimator: stochastic.then(|| "ml".to_string()),
        exposure: stochastic.then_some(exp.exposure),
        seed,
        rows,
    };
    let text = match exp.effective_format() {
        Format::Json => file.to_json(),
        Format::Csv => file.to_csv(),
    };
    write_text(&out, &text)?;
    outln!("command: sweep");
    outln!("scheme: {}", scheme.name());
    outln!("mode: {}", exp.mode.name());
    outln!("rows: {}", file.rows.len());
    outln!("wrote: {}", out.display());
    Ok(())
}

/// Simulate one tomography experiment and report the reconstruction.
pub fn cmd_tomography(exp: &Experiment) -> Result<(), CliError> {
    let scheme = exp.require_scheme()?;
    let angle = exp.require_angle()?;
    let mode = exp.mode.reconstruction().ok_or_else(|| {
        CliError::Usage("tomography needs --mode unital3 or full4".into())
    })?;
    let seed = exp.require_seed()?;
    let inputs = exp.inputs_for_mode()?;
    if let Some(list) = &exp.inputs {
        let expect = match mode {
            depol::tomography::ReconstructionMode::Unital3 => 3,
            depol::tomography::ReconstructionMode::Full4 => 4,
        };
        if list.len() != expect {
            return Err(CliError::Usage(format!(
                "mode {} needs {} input states, got {}",
                exp.mode.name(),
                expect,
                list.len()
            )));
        }
    }

    let channel = scheme.channel(angle.radians());
    let theory = channel.chi();
    let settings = MLSettings::for_process();
    let chi = reconstruct_process(&channel, &inputs, exp.exposure, seed, mode, &settings)
        .map_err(recon_err)?;
    let fidelity = process_fidelity(&chi, &theory).map_err(recon_err)?;

    outln!("command: tomography");
    outln!("scheme: {}", scheme.name());
    outln!("angle_degrees: {}", angle.degrees());
    outln!("mode: {}", exp.mode.name());
    outln!("estimator: ml");
    outln!("exposure: {}", exp.exposure);
    outln!("seed: {seed}");
    outln!("fidelity_to_theory: {fidelity}");
    print_spectrum_lines(&chi);
    print_matrix4("chi_re", |i, j| chi.matrix()[(i, j)].re);
    print_matrix4("chi_im", |i, j| chi.matrix()[(i, j)].im);
    write_chi_if_requested(exp, &chi)
}

/// Latitude/longitude grid of unit Stokes vectors and their channel images.
pub fn cmd_ellipsoid(exp: &Experiment) -> Result<(), CliError> {
    if exp.mode != Mode::Theory {
        return Err(CliError::Usage("ellipsoid is a theory-mode command".into()));
    }
    let scheme = exp.require_scheme()?;
    let angle = exp.require_angle()?;
    let out = exp
        .out
        .clone()
        .ok_or_else(|| CliError::Usage("ellipsoid needs --out".into()))?;
    let (lat, lon) = exp.grid;

    let map = scheme.channel(angle.radians()).chi().bloch_map();
    let mut points = Vec::with_capacity(lat * lon);
    for i in 0..lat {
        // Poles included; S₃ is the polar axis.
        let polar = std::f64::consts::PI * i as f64 / (lat - 1) as f64;
        for j in 0..lon {
            let azimuth = 2.0 * std::f64::consts::PI * j as f64 / lon as f64;
            let s = StokesVector::new(
                polar.sin() * azimuth.cos(),
                polar.sin() * azimuth.sin(),
                polar.cos(),
            );
            let image = map.apply(&s);
            points.push(EllipsoidPoint {
                input: [s.s1, s.s2, s.s3],
                image: [image.s1, image.s2, image.s3],
            });
        }
    }
    let file = EllipsoidFile {
        scheme: scheme.name().to_string(),
        angle_degrees: angle.degrees(),
        latitudes: lat,
        longitudes: lon,
        points,
    };
    let text = match exp.effective_format() {
        Format::Json => file.to_json(),
        Format::Csv => file.to_csv(),
    };
    write_text(&out, &text)?;
    outln!("command: ellipsoid");
    outln!("scheme: {}", scheme.name());
    outln!("angle_degrees: {}", angle.degrees());
    outln!("points: {}", lat * lon);
    outln!("wrote: {}", out.display());
    Ok(())
}

/// Compare two serialized χ matrices.
pub fn cmd_compare(path_a: &std::path::Path, path_b: &std::path::Path) -> Result<(), CliError> {
    let a = read_chi(path_a)?;
    let b = read_chi(path_b)?;
    let fidelity = process_fidelity(&a, &b)
        .map_err(|e| CliError::Malformed(format!("cannot compare: {e}")))?;
    let ea = a.eigenvalues();
    let eb = b.eigenvalues();
    let max_diff = depol_max_entry_difference(&a, &b);

    outln!("command: compare");
    outln!("file_a: {}", path_a.display());
    outln!("file_b: {}", path_b.display());
    outln!("fidelity: {fidelity}");
    outln!("eigenvalues_a: {} {} {} {}", ea[0], ea[1], ea[2], ea[3]);
    outln!("eigenvalues_b: {} {} {} {}", eb[0], eb[1], eb[2], eb[3]);
    outln!("max_entry_difference: {max_diff}");
    Ok(())
}

fn depol_max_entry_difference(a: &ChiMatrix, b: &ChiMatrix) -> f64 {
    let mut max = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            max = max.max((a.matrix()[(i, j)] - b.matrix()[(i, j)]).norm());
        }
    }
    max
}
