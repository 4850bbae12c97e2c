//! The four subcommands.

use std::fs;
use std::path::Path;

use nclift::axioms::{
    boundary_sweep, check_product_axioms, roots_of_unity_grid, verification_suite, AxiomReport, SweepFamily, SweepPoint,
};
use nclift::pathweight::{build_graph, moment_by_paths};
use nclift::products::{
    canonicalize_spec, classify_single_face, free_table, mixed_moment, name_product, predicted_symmetric, tensor_table,
    Letter, MomentWord, ProductSpec, TableCell,
};
use nclift::{PointedSpace, C64};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use crate::output::{complex, emit, float, Csv};
use crate::{Failure, Format, RunConfig};

const DEFAULT_LIFT_DIMS: [usize; 3] = [2, 3, 2];

fn read_json<T: DeserializeOwned>(path: Option<&Path>, flag: &str, what: &str) -> Result<T, Failure> {
    let path = path.ok_or_else(|| Failure::Input(format!("missing --{flag} PATH ({what})")))?;
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read_spec(config: &RunConfig) -> Result<ProductSpec, Failure> {
    read_json(config.spec.as_deref(), "spec", "a JSON product specification")
}

fn read_word(config: &RunConfig) -> Result<MomentWord, Failure> {
    let usage =
        "expected a nonempty JSON array of letters {\"algebra\": 1|2, \"face\": f, \"op\": [[[re, im], ...], ...]}";
    let letters: Vec<Letter> = read_json(config.word.as_deref(), "word", usage)?;
    MomentWord::new(letters).map_err(|_| Failure::Input(format!("the word file contains no letters; {usage}")))
}

/// Factor dimensions of a word: read off its letters, checked against
/// `--dims` when given; factors without letters default to dimension 2.
fn word_dims(word: &MomentWord, dims: Option<&[usize]>) -> Result<[PointedSpace; 2], Failure> {
    let mut out = [None, None];
    for (n, letter) in word.letters.iter().enumerate() {
        let k = match letter.algebra {
            1 | 2 => letter.algebra as usize - 1,
            a => {
                return Err(Failure::Input(format!(
                    "letter {}: algebra must be 1 or 2, got {a}",
                    n + 1
                )))
            }
        };
        let d = letter.op.dim();
        match out[k] {
            Some(prev) if prev != d => {
                return Err(Failure::Input(format!(
                    "letter {}: operator on algebra {} has dimension {d}, earlier letters have {prev}",
                    n + 1,
                    k + 1
                )))
            }
            _ => out[k] = Some(d),
        }
    }
    if let Some(dims) = dims {
        if dims.len() != 2 {
            return Err(Failure::Input(format!(
                "--dims needs two entries for a moment, got {}",
                dims.len()
            )));
        }
        for k in 0..2 {
            match out[k] {
                Some(d) if d != dims[k] => {
                    return Err(Failure::Input(format!(
                        "--dims gives {} for algebra {} but its letters have {d}",
                        dims[k],
                        k + 1
                    )))
                }
                _ => out[k] = Some(dims[k]),
            }
        }
    }
    Ok([
        PointedSpace::new(out[0].unwrap_or(2))?,
        PointedSpace::new(out[1].unwrap_or(2))?,
    ])
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn moment(config: &RunConfig, max_len: Option<usize>) -> Result<(), Failure> {
    let spec = read_spec(config)?;
    let word = read_word(config)?;
    let [h1, h2] = word_dims(&word, config.dims.as_deref())?;
    let operator = mixed_moment(&spec, &word, h1, h2)?.value;
    let graph = build_graph(&spec, max_len.unwrap_or(word.len().div_ceil(2)))?;
    let paths = moment_by_paths(&graph, &word, h1, h2)?;
    let difference = (operator - paths).norm();
    let agree = difference <= config.tol;
    let json = json!({
        "spec": spec,
        "dims": [h1.dim(), h2.dim()],
        "word_length": word.len(),
        "operator_model": pair(operator),
        "path_oracle": pair(paths),
        "difference": difference,
        "tolerance": config.tol,
        "agree": agree,
    });
    emit(config, Format::Json, &json, || {
        let mut csv = Csv::new(vec![
            "operator_re",
            "operator_im",
            "paths_re",
            "paths_im",
            "difference",
            "agree",
        ]);
        let mut row: Vec<String> = complex(operator).into();
        row.extend(complex(paths));
        row.push(float(difference));
        row.push(agree.to_string());
        csv.push(row);
        csv
    })?;
    if agree {
        Ok(())
    } else {
        Err(Failure::Mismatch(format!(
            "operator model and path oracle differ by {difference:e}"
        )))
    }
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    family: &'a str,
    dims: &'a [usize],
    trials: usize,
    seed: u64,
    unexpected: usize,
    reports: &'a [AxiomReport],
}

pub fn verify(config: &RunConfig, family: Option<&str>) -> Result<(), Failure> {
    let dims = config.dims.clone().unwrap_or(DEFAULT_LIFT_DIMS.to_vec());
    let spec = config.spec.is_some().then(|| read_spec(config)).transpose()?;
    let family = match (family, &spec) {
        (Some(f), _) => Some(f),
        (None, None) => Some("all"),
        (None, Some(_)) => None,
    };
    let mut reports = match family {
        Some(f) => verification_suite(f, &dims, config.trials, config.seed)?,
        None => Vec::new(),
    };
    if let Some(spec) = &spec {
        reports.extend(check_product_axioms(spec, &dims, config.trials, config.seed)?);
    }
    let family = family.unwrap_or("spec");
    let unexpected: Vec<&AxiomReport> = reports.iter().filter(|r| !r.as_expected()).collect();
    let out = VerifyOutput {
        family,
        dims: &dims,
        trials: config.trials,
        seed: config.seed,
        unexpected: unexpected.len(),
        reports: &reports,
    };
    emit(config, Format::Json, &out, || {
        let mut csv = Csv::new(vec![
            "axiom",
            "subject",
            "passed",
            "expected",
            "max_violation",
            "tolerance",
            "trials",
            "seed",
        ]);
        for r in &reports {
            csv.push(vec![
                r.axiom.name(),
                r.subject.clone(),
                r.passed.to_string(),
                r.expected
                    .map_or_else(|| "any".into(), |e| if e { "pass" } else { "fail" }.into()),
                float(r.max_violation),
                float(r.tolerance),
                r.trials.to_string(),
                r.seed.to_string(),
            ]);
        }
        csv
    })?;
    if unexpected.is_empty() {
        Ok(())
    } else {
        let names: Vec<String> = unexpected
            .iter()
            .map(|r| format!("{} {}", r.subject, r.axiom.name()))
            .collect();
        Err(Failure::Mismatch(format!(
            "{} unexpected outcome(s): {}",
            names.len(),
            names.join(", ")
        )))
    }
}

pub fn classify(config: &RunConfig) -> Result<(), Failure> {
    let spec = read_spec(config)?;
    let json = match spec.faces() {
        [face] => {
            let product = classify_single_face(spec.monoidal(), face.gamma, face.delta)?;
            json!({ "spec": spec, "name": product.to_string(), "family": product.to_string() })
        }
        [_, _] => {
            let canonical = canonicalize_spec(&spec)?;
            let name = name_product(&spec)?;
            json!({
                "spec": spec,
                "canonical": canonical,
                "name": name.to_string(),
                "family": name.family,
                "zeta": name.zeta.map(pair),
                "theta": name.theta.map(pair),
                "symmetric": predicted_symmetric(&spec)?,
            })
        }
        faces => {
            return Err(Failure::Input(format!(
                "classification needs one or two faces, the spec has {}",
                faces.len()
            )))
        }
    };
    emit(config, Format::Json, &json, || {
        let mut csv = Csv::new(vec!["name", "family", "zeta_re", "zeta_im", "theta_re", "theta_im"]);
        let get = |key: &str, i: usize| json[key].get(i).and_then(|v| v.as_f64()).map(float).unwrap_or_default();
        csv.push(vec![
            json["name"].as_str().unwrap_or_default().into(),
            json["family"].as_str().unwrap_or_default().into(),
            get("zeta", 0),
            get("zeta", 1),
            get("theta", 0),
            get("theta", 1),
        ]);
        csv
    })
}

fn table_csv(cells: &[TableCell]) -> Csv {
    let mut csv = Csv::new(vec!["face1", "face2", "product", "canonical", "continuous"]);
    for c in cells {
        csv.push(vec![
            c.face1.clone(),
            c.face2.clone(),
            c.product.clone(),
            c.canonical.clone(),
            c.continuous.to_string(),
        ]);
    }
    csv
}

fn sweep_csv(points: &[SweepPoint]) -> Csv {
    let mut csv = Csv::new(vec![
        "gamma_re",
        "gamma_im",
        "delta_re",
        "delta_im",
        "passed",
        "expected",
        "violation",
    ]);
    for p in points {
        let mut row: Vec<String> = complex(p.gamma.value()).into();
        row.extend(complex(p.delta.value()));
        row.extend([p.passed.to_string(), p.expected.to_string(), float(p.violation)]);
        csv.push(row);
    }
    csv
}

pub fn table(config: &RunConfig, which: &str) -> Result<(), Failure> {
    let family = match which {
        "tensor" => {
            let cells = tensor_table()?;
            return emit(config, Format::Csv, &cells, || table_csv(&cells));
        }
        "free" => {
            let cells = free_table()?;
            return emit(config, Format::Csv, &cells, || table_csv(&cells));
        }
        "sweep-tensor" => SweepFamily::TensorPair,
        "sweep-free" => SweepFamily::FreeSameSide,
        "sweep-free-mixed" => SweepFamily::FreeMixedSide,
        other => {
            return Err(Failure::Input(format!(
                "unknown table {other:?}; expected tensor, free, sweep-tensor, sweep-free or sweep-free-mixed"
            )))
        }
    };
    let dims = config.dims.clone().unwrap_or(DEFAULT_LIFT_DIMS.to_vec());
    let points = boundary_sweep(family, &roots_of_unity_grid(12), &dims, config.seed)?;
    emit(config, Format::Csv, &points, || sweep_csv(&points))?;
    let off: Vec<String> = points
        .iter()
        .filter(|p| p.passed != p.expected)
        .map(|p| format!("(γ={}, δ={})", p.gamma, p.delta))
        .collect();
    if off.is_empty() {
        Ok(())
    } else {
        Err(Failure::Mismatch(format!(
            "sweep disagrees with the classification at {}",
            off.join(", ")
        )))
    }
}
