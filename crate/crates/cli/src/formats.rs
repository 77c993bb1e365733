//! On-disk formats: `MDCS-GRID v1` spectra and `MDCS-DECAY v1` decay
//! tables. Self-describing text headers followed by tab-separated values,
//! every float printed at 17 significant digits so numeric round-trips are
//! exact to the ulp. Locale-independent: `.` decimals, `\n` newlines.

use std::io::Write as _;
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64;

use mdcs_core::spectra::{EnergyAxis, Spectrum2D, SpectrumKind};

use crate::error::CliError;

pub const GRID_TAG: &str = "MDCS-GRID v1";
pub const DECAY_TAG: &str = "MDCS-DECAY v1";

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_spectrum(path: &Path, spec: &Spectrum2D, seed: u64) -> Result<(), CliError> {
    let mut buf = String::new();
    buf.push_str(GRID_TAG);
    buf.push('\n');
    buf.push_str(&format!("kind={}\n", spec.kind.as_str()));
    buf.push_str(&format!("axis_x_min_mev={}\n", fmt_f64(spec.axis_x.min_mev())));
    buf.push_str(&format!("axis_x_step_mev={}\n", fmt_f64(spec.axis_x.step_mev())));
    buf.push_str(&format!("axis_x_count={}\n", spec.axis_x.len()));
    buf.push_str(&format!("axis_y_min_mev={}\n", fmt_f64(spec.axis_y.min_mev())));
    buf.push_str(&format!("axis_y_step_mev={}\n", fmt_f64(spec.axis_y.step_mev())));
    buf.push_str(&format!("axis_y_count={}\n", spec.axis_y.len()));
    buf.push_str(&format!("reference_energy_mev={}\n", fmt_f64(spec.reference_energy_mev)));
    buf.push_str(&format!("seed={seed}\n"));
    buf.push_str("values=row_major_re_im\n");
    for iy in 0..spec.axis_y.len() {
        for ix in 0..spec.axis_x.len() {
            let v = spec.values[[iy, ix]];
            buf.push_str(&fmt_f64(v.re));
            buf.push('\t');
            buf.push_str(&fmt_f64(v.im));
            buf.push('\n');
        }
    }
    write_atomic(path, buf.as_bytes())
}

pub fn read_spectrum(path: &Path) -> Result<(Spectrum2D, u64), CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
    let mut lines = text.lines().enumerate();
    let fail = |line: usize, message: &str| CliError::Format {
        path: path.into(),
        line: line + 1,
        message: message.to_string(),
    };

    let (i, tag) = lines.next().ok_or_else(|| fail(0, "empty file"))?;
    if tag.trim() != GRID_TAG {
        return Err(fail(i, &format!("expected `{GRID_TAG}` header")));
    }

    let mut kind = None;
    let mut fields = std::collections::HashMap::new();
    let mut data_start = None;
    for (i, line) in lines.by_ref() {
        if line.trim() == "values=row_major_re_im" {
            data_start = Some(i + 1);
            break;
        }
        let (key, value) =
            line.split_once('=').ok_or_else(|| fail(i, "expected key=value header line"))?;
        if key == "kind" {
            kind = Some(match value {
                "single_quantum" => SpectrumKind::SingleQuantum,
                "zero_quantum" => SpectrumKind::ZeroQuantum,
                "double_quantum" => SpectrumKind::DoubleQuantum,
                other => return Err(fail(i, &format!("unknown spectrum kind `{other}`"))),
            });
        } else {
            fields.insert(key.to_string(), (i, value.to_string()));
        }
    }
    let data_line = data_start.ok_or_else(|| fail(text.lines().count(), "missing values marker"))?;
    let kind = kind.ok_or_else(|| fail(data_line, "missing kind"))?;

    let get_f64 = |name: &str| -> Result<f64, CliError> {
        let (i, v) =
            fields.get(name).ok_or_else(|| fail(data_line, &format!("missing header `{name}`")))?;
        v.parse::<f64>().map_err(|e| fail(*i, &format!("bad float for `{name}`: {e}")))
    };
    let get_usize = |name: &str| -> Result<usize, CliError> {
        let (i, v) =
            fields.get(name).ok_or_else(|| fail(data_line, &format!("missing header `{name}`")))?;
        v.parse::<usize>().map_err(|e| fail(*i, &format!("bad integer for `{name}`: {e}")))
    };

    let nx = get_usize("axis_x_count")?;
    let ny = get_usize("axis_y_count")?;
    let axis_x = EnergyAxis::new(get_f64("axis_x_min_mev")?, get_f64("axis_x_step_mev")?, nx)
        .map_err(|e| fail(data_line, &e.to_string()))?;
    let axis_y = EnergyAxis::new(get_f64("axis_y_min_mev")?, get_f64("axis_y_step_mev")?, ny)
        .map_err(|e| fail(data_line, &e.to_string()))?;
    let reference = get_f64("reference_energy_mev")?;
    let seed = get_usize("seed")? as u64;

    let mut values = Array2::zeros((ny, nx));
    let mut count = 0usize;
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        if count >= nx * ny {
            return Err(fail(i, "more value lines than axis_x_count × axis_y_count"));
        }
        let (re, im) = line.split_once('\t').ok_or_else(|| fail(i, "expected re<TAB>im"))?;
        let re: f64 = re.parse().map_err(|e| fail(i, &format!("bad real part: {e}")))?;
        let im: f64 = im.parse().map_err(|e| fail(i, &format!("bad imaginary part: {e}")))?;
        values[[count / nx, count % nx]] = Complex64::new(re, im);
        count += 1;
    }
    if count != nx * ny {
        return Err(CliError::Format {
            path: path.into(),
            line: text.lines().count(),
            message: format!("truncated values: got {count}, expected {}", nx * ny),
        });
    }

    Ok((
        Spectrum2D { kind, axis_x, axis_y, values, reference_energy_mev: reference },
        seed,
    ))
}

pub fn write_decay(path: &Path, decay: &[(f64, f64)], seed: u64) -> Result<(), CliError> {
    let mut buf = String::new();
    buf.push_str(DECAY_TAG);
    buf.push('\n');
    buf.push_str(&format!("count={}\n", decay.len()));
    buf.push_str(&format!("seed={seed}\n"));
    buf.push_str("values=tau_ps_amplitude\n");
    for (tau, amp) in decay {
        buf.push_str(&fmt_f64(*tau));
        buf.push('\t');
        buf.push_str(&fmt_f64(*amp));
        buf.push('\n');
    }
    write_atomic(path, buf.as_bytes())
}

pub fn read_decay(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
    let fail = |line: usize, message: &str| CliError::Format {
        path: path.into(),
        line: line + 1,
        message: message.to_string(),
    };
    let mut lines = text.lines().enumerate();
    let (i, tag) = lines.next().ok_or_else(|| fail(0, "empty file"))?;
    if tag.trim() != DECAY_TAG {
        return Err(fail(i, &format!("expected `{DECAY_TAG}` header")));
    }
    let mut count = None;
    for (i, line) in lines.by_ref() {
        if line.trim() == "values=tau_ps_amplitude" {
            break;
        }
        let (key, value) =
            line.split_once('=').ok_or_else(|| fail(i, "expected key=value header line"))?;
        if key == "count" {
            count =
                Some(value.parse::<usize>().map_err(|e| fail(i, &format!("bad count: {e}")))?);
        }
    }
    let count = count.ok_or_else(|| fail(0, "missing count header"))?;
    let mut out = Vec::with_capacity(count);
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let (tau, amp) = line.split_once('\t').ok_or_else(|| fail(i, "expected tau<TAB>amplitude"))?;
        let tau: f64 = tau.parse().map_err(|e| fail(i, &format!("bad tau: {e}")))?;
        let amp: f64 = amp.parse().map_err(|e| fail(i, &format!("bad amplitude: {e}")))?;
        out.push((tau, amp));
    }
    if out.len() != count {
        return Err(CliError::Format {
            path: path.into(),
            line: text.lines().count(),
            message: format!("truncated table: got {}, expected {count}", out.len()),
        });
    }
    Ok(out)
}

/// Kind of an input file, sniffed from its first line.
pub enum InputKind {
    Spectrum,
    Decay,
}

pub fn sniff(path: &Path) -> Result<InputKind, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
    match text.lines().next().map(str::trim) {
        Some(t) if t == GRID_TAG => Ok(InputKind::Spectrum),
        Some(t) if t == DECAY_TAG => Ok(InputKind::Decay),
        _ => Err(CliError::Format {
            path: path.into(),
            line: 1,
            message: format!("unrecognized format tag (expected `{GRID_TAG}` or `{DECAY_TAG}`)"),
        }),
    }
}

/// x/y/intensity companion table for external plotting.
pub fn write_plot_data(path: &Path, spec: &Spectrum2D) -> Result<(), CliError> {
    let mut buf = String::from("# x_mev\ty_mev\tmagnitude\n");
    for (iy, ey) in spec.axis_y.iter().enumerate() {
        for (ix, ex) in spec.axis_x.iter().enumerate() {
            buf.push_str(&format!("{ex:.9e}\t{ey:.9e}\t{:.9e}\n", spec.values[[iy, ix]].norm()));
        }
    }
    write_atomic(path, buf.as_bytes())
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    write_atomic(path, text.as_bytes())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut f = std::fs::File::create(path)
        .map_err(|source| CliError::Write { path: path.into(), source })?;
    f.write_all(bytes).map_err(|source| CliError::Write { path: path.into(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use mdcs_core::spectra::SpectrumKind;

    fn sample_spectrum() -> Spectrum2D {
        let axis_x = EnergyAxis::new(1940.0, 0.017, 7).unwrap();
        let axis_y = EnergyAxis::new(1941.3, 0.029, 5).unwrap();
        let mut values = Array2::zeros((5, 7));
        for ((iy, ix), v) in values.indexed_iter_mut() {
            *v = Complex64::new(
                (iy as f64 + 1.0) * 0.123456789012345678 / (ix as f64 + 1.0),
                -(ix as f64) * 1.9e-17 + iy as f64,
            );
        }
        Spectrum2D {
            kind: SpectrumKind::SingleQuantum,
            axis_x,
            axis_y,
            values,
            reference_energy_mev: 1945.0,
        }
    }

    #[test]
    fn spectrum_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.spectrum");
        let spec = sample_spectrum();
        write_spectrum(&path, &spec, 42).unwrap();
        let (back, seed) = read_spectrum(&path).unwrap();
        assert_eq!(seed, 42);
        assert_eq!(back.kind, spec.kind);
        assert_eq!(back.axis_x, spec.axis_x);
        assert_eq!(back.axis_y, spec.axis_y);
        assert_eq!(back.reference_energy_mev, spec.reference_energy_mev);
        assert_eq!(back.values, spec.values);

        // Writing again produces identical bytes.
        let path2 = dir.path().join("s2.spectrum");
        write_spectrum(&path2, &back, 42).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    }

    #[test]
    fn truncated_spectrum_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.spectrum");
        write_spectrum(&path, &sample_spectrum(), 1).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let cut: Vec<&str> = text.lines().take(20).collect();
        std::fs::write(&path, cut.join("\n")).unwrap();
        match read_spectrum(&path) {
            Err(CliError::Format { line, .. }) => assert!(line >= 20, "line {line}"),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn decay_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.decay");
        let decay = vec![(0.0, 1.0), (0.5, 0.77777777777777773), (1.0, 0.3e-17)];
        write_decay(&path, &decay, 9).unwrap();
        assert!(matches!(sniff(&path).unwrap(), InputKind::Decay));
        assert_eq!(read_decay(&path).unwrap(), decay);
    }
}
