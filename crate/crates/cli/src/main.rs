//! `multiform`: JSON front end to the multiform-core algorithms.
//!
//! Exit codes: 0 success, 1 I/O, schema or singular input, 2 invalid
//! witness, 3 value outside the field (rerun over a float field),
//! 4 numerical instability, 5 decompositions that do not align.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use multiform_core::decompose::{align_decompositions, support_blocks};
use multiform_core::gen::{gen_decomposable, gen_selfadjoint_pair, gen_witness};
use multiform_core::json::{
    certificate_to_doc, decomposition_from_doc, decomposition_to_doc, form_from_doc, form_to_doc, maps_from_doc,
    maps_to_doc, matrix_to_doc, DecompositionDoc, FieldScalar, FormDoc, MapsDoc,
};
use multiform_core::scalar::AnyScalar;
use multiform_core::symmetrize::{check_witness_with, symmetrize_complex, symmetrize_real, verify_congruence};
use multiform_core::{
    ComplexScalar, Counterexample, DecomposeError, FieldKind, GenSpec, Matrix, MultiForm, RealScalar, Scalar,
    SignedCongruence, SymmetrizeError, SymmetrizeOptions, TolerancePolicy, Witness, C64, Q, Qi, R64,
};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "multiform", version, about = "Congruence certificates and decompositions of multilinear forms")]
struct Cli {
    /// Relative and absolute tolerance for float fields.
    #[arg(long, global = true, env = "MULTIFORM_TOL")]
    tol: Option<f64>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Turn a witness (F, G, maps) into a single congruence.
    Symmetrize {
        #[command(flatten)]
        witness: WitnessArgs,
        /// Recompute the residual of the certificate before exiting.
        #[arg(long)]
        verify: bool,
    },
    /// Check the witness equations for every slot reordering.
    CheckWitness {
        #[command(flatten)]
        witness: WitnessArgs,
        /// Check all n! reorderings even for arity above 4.
        #[arg(long)]
        full: bool,
    },
    /// Split a form into support-connected blocks and its radical.
    Decompose {
        #[arg(long)]
        form: PathBuf,
        #[arg(long)]
        field: Option<Field>,
        /// Check that the blocks decompose the form before exiting.
        #[arg(long)]
        verify: bool,
    },
    /// Match the blocks of two decompositions of one form.
    Align {
        #[arg(long)]
        form: PathBuf,
        #[arg(long)]
        first: PathBuf,
        #[arg(long)]
        second: PathBuf,
        #[arg(long)]
        field: Option<Field>,
        /// Re-check each block congruence before exiting.
        #[arg(long)]
        verify: bool,
    },
    /// Basis of the radical.
    Radical {
        #[arg(long)]
        form: PathBuf,
        #[arg(long)]
        field: Option<Field>,
    },
    /// Evaluate a form on one vector per slot.
    Eval {
        #[arg(long)]
        form: PathBuf,
        /// JSON array of vectors (arrays of scalar strings).
        #[arg(long)]
        vectors: PathBuf,
        #[arg(long)]
        field: Option<Field>,
    },
    /// Write generator fixtures for a spec into a directory.
    Gen {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_enum, default_value_t = GenKind::Witness)]
        kind: GenKind,
        /// Overrides the seed in the spec.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        dir: PathBuf,
    },
}

#[derive(clap::Args)]
struct WitnessArgs {
    #[arg(long)]
    form_f: PathBuf,
    #[arg(long)]
    form_g: PathBuf,
    #[arg(long)]
    maps: PathBuf,
    /// Arithmetic to run in; defaults to the field of the documents.
    #[arg(long)]
    field: Option<Field>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Field {
    #[value(name = "Q")]
    Q,
    #[value(name = "Qi")]
    Qi,
    #[value(name = "R64")]
    R64,
    #[value(name = "C64")]
    C64,
}

impl From<Field> for FieldKind {
    fn from(f: Field) -> Self {
        match f {
            Field::Q => FieldKind::ExactRational,
            Field::Qi => FieldKind::ExactGaussianRational,
            Field::R64 => FieldKind::FloatReal,
            Field::C64 => FieldKind::FloatComplex,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Witness,
    Decomposable,
    Pair,
}

/// A failure with its exit code and an optional JSON body for stdout.
struct Failure {
    code: u8,
    message: String,
    body: Option<Value>,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into(), body: None }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::input(format!("{e:#}"))
    }
}

type Outcome = Result<Value, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let pol = match cli.tol.map(TolerancePolicy::uniform).transpose() {
        Ok(p) => p.unwrap_or_default(),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let result = run(&cli.command, &pol);
    let (code, body) = match result {
        Ok(v) => (0, Some(v)),
        Err(f) => {
            eprintln!("error: {}", f.message);
            if f.code == 3 {
                eprintln!("hint: rerun with --field R64 (real data) or --field C64");
            }
            (f.code, f.body)
        }
    };
    if let Some(v) = body {
        let text = serde_json::to_string_pretty(&v).expect("serializable") + "\n";
        let written = match (&cli.out, code) {
            (Some(path), 0) => fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
            _ => {
                print!("{text}");
                Ok(())
            }
        };
        if let Err(e) = written {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    ExitCode::from(code)
}

fn run(cmd: &Command, pol: &TolerancePolicy) -> Outcome {
    match cmd {
        Command::Symmetrize { witness, verify } => {
            let docs = WitnessDocs::load(witness)?;
            match docs.field {
                FieldKind::ExactRational => symmetrize_real_cmd::<Q>(&docs, pol, *verify),
                FieldKind::FloatReal => symmetrize_real_cmd::<R64>(&docs, pol, *verify),
                FieldKind::ExactGaussianRational => symmetrize_complex_cmd::<Qi>(&docs, pol, *verify),
                FieldKind::FloatComplex => symmetrize_complex_cmd::<C64>(&docs, pol, *verify),
            }
        }
        Command::CheckWitness { witness, full } => {
            let docs = WitnessDocs::load(witness)?;
            dispatch!(docs.field, check_witness_cmd(&docs, pol, *full))
        }
        Command::Decompose { form, field, verify } => {
            let doc = load_form(form, *field)?;
            dispatch!(doc.field, decompose_cmd(&doc, pol, *verify))
        }
        Command::Align { form, first, second, field, verify } => {
            let f = load_form(form, *field)?;
            let d1: DecompositionDoc = read_json(first)?;
            let d2: DecompositionDoc = read_json(second)?;
            let d1 = convert_decomposition(d1, f.field)?;
            let d2 = convert_decomposition(d2, f.field)?;
            dispatch!(f.field, align_cmd(&f, &d1, &d2, pol, *verify))
        }
        Command::Radical { form, field } => {
            let doc = load_form(form, *field)?;
            dispatch!(doc.field, radical_cmd(&doc, pol))
        }
        Command::Eval { form, vectors, field } => {
            let doc = load_form(form, *field)?;
            let vs: Vec<Vec<String>> = read_json(vectors)?;
            dispatch!(doc.field, eval_cmd(&doc, &vs))
        }
        Command::Gen { spec, kind, seed, dir } => {
            let mut spec: GenSpec = read_json(spec)?;
            if let Some(s) = seed {
                spec.seed = *s;
            }
            fs::create_dir_all(dir).map_err(|e| Failure::input(format!("{}: {e}", dir.display())))?;
            dispatch!(spec.field, gen_cmd(&spec, *kind, dir))
        }
    }
}

macro_rules! dispatch {
    ($field:expr, $f:ident ( $($arg:expr),* )) => {
        match $field {
            FieldKind::ExactRational => $f::<Q>($($arg),*),
            FieldKind::ExactGaussianRational => $f::<Qi>($($arg),*),
            FieldKind::FloatReal => $f::<R64>($($arg),*),
            FieldKind::FloatComplex => $f::<C64>($($arg),*),
        }
    };
}
use dispatch;

// ------------------------------------------------------------------ input

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// Re-expresses a scalar string of one field in another. Exact values move
/// to float fields, rationals into Gaussian rationals, and real into complex.
fn convert_value(text: &str, from: FieldKind, to: FieldKind) -> Result<String, Failure> {
    if from == to {
        return Ok(text.to_string());
    }
    let v = AnyScalar::parse(from, text).map_err(|e| Failure::input(e.to_string()))?;
    let z = match &v {
        AnyScalar::Q(x) => x.to_c64(),
        AnyScalar::Qi(x) => x.to_c64(),
        AnyScalar::R64(x) => x.to_c64(),
        AnyScalar::C64(x) => *x,
    };
    let lossless = from.is_exact() || !to.is_exact();
    let keeps_imaginary = to.is_complex() || z.im == 0.0;
    if !lossless || !keeps_imaginary {
        return Err(Failure::input(format!("cannot convert {text} from {from} to {to}")));
    }
    Ok(match (v, to) {
        (AnyScalar::Q(x), FieldKind::ExactGaussianRational) => Qi::from_real(x).format(),
        (_, FieldKind::FloatReal) => R64::from_c64(z).format(),
        (_, FieldKind::FloatComplex) => Scalar::format(&C64::from_c64(z)),
        _ => return Err(Failure::input(format!("cannot convert {text} from {from} to {to}"))),
    })
}

fn convert_rows(rows: Vec<Vec<String>>, from: FieldKind, to: FieldKind) -> Result<Vec<Vec<String>>, Failure> {
    rows.into_iter().map(|r| r.iter().map(|v| convert_value(v, from, to)).collect()).collect()
}

fn load_form(path: &Path, field: Option<Field>) -> Result<FormDoc, Failure> {
    let mut doc: FormDoc = read_json(path)?;
    if let Some(target) = field.map(FieldKind::from) {
        for e in &mut doc.entries {
            e.val = convert_value(&e.val, doc.field, target)?;
        }
        doc.field = target;
    }
    Ok(doc)
}

fn convert_decomposition(mut d: DecompositionDoc, to: FieldKind) -> Result<DecompositionDoc, Failure> {
    let from = d.field;
    d.blocks = d.blocks.into_iter().map(|b| convert_rows(b, from, to)).collect::<Result<_, _>>()?;
    d.radical = convert_rows(d.radical, from, to)?;
    d.field = to;
    Ok(d)
}

struct WitnessDocs {
    field: FieldKind,
    f: FormDoc,
    g: FormDoc,
    maps: MapsDoc,
}

impl WitnessDocs {
    fn load(args: &WitnessArgs) -> Result<Self, Failure> {
        let source = read_json::<FormDoc>(&args.form_f)?;
        let target = args.field.map(FieldKind::from).unwrap_or(source.field);
        let f = load_form(&args.form_f, Some(field_arg(target)))?;
        let g = load_form(&args.form_g, Some(field_arg(target)))?;
        // a bare list of matrices is read in the field of F
        let raw: Value = read_json(&args.maps)?;
        let raw = if raw.is_array() { json!({ "field": source.field, "maps": raw }) } else { raw };
        let mut maps: MapsDoc =
            serde_json::from_value(raw).map_err(|e| Failure::input(format!("{}: {e}", args.maps.display())))?;
        let from = maps.field;
        maps.maps = maps.maps.into_iter().map(|m| convert_rows(m, from, target)).collect::<Result<_, _>>()?;
        maps.field = target;
        Ok(Self { field: target, f, g, maps })
    }

    fn witness<S: FieldScalar>(&self) -> Result<Witness<S>, Failure> {
        let schema = |e: multiform_core::JsonError| Failure::input(e.to_string());
        let f = form_from_doc::<S>(&self.f).map_err(schema)?;
        let g = form_from_doc::<S>(&self.g).map_err(schema)?;
        let maps = maps_from_doc::<S>(&self.maps).map_err(schema)?;
        Witness::new(maps, f, g).map_err(|e| match e {
            SymmetrizeError::SingularMap(i) => Failure::input(format!("map {i} in the maps file is singular")),
            other => Failure::input(other.to_string()),
        })
    }
}

fn field_arg(k: FieldKind) -> Field {
    match k {
        FieldKind::ExactRational => Field::Q,
        FieldKind::ExactGaussianRational => Field::Qi,
        FieldKind::FloatReal => Field::R64,
        FieldKind::FloatComplex => Field::C64,
    }
}

// --------------------------------------------------------------- commands

fn counterexample_json(cx: &Counterexample) -> Value {
    json!({
        "assignment": cx.assignment,
        "index": cx.index,
        "expected": cx.expected,
        "found": cx.found,
    })
}

fn symmetrize_failure(e: SymmetrizeError) -> Failure {
    let message = e.to_string();
    match e {
        SymmetrizeError::WitnessInvalid(cx) => {
            Failure { code: 2, message, body: Some(json!({ "counterexample": counterexample_json(&cx) })) }
        }
        SymmetrizeError::SingularMap(i) => Failure::input(format!("map {i} is singular")),
        SymmetrizeError::NoRootInField(_) | SymmetrizeError::EigenvalueNotFound(_) => {
            Failure { code: 3, message, body: None }
        }
        SymmetrizeError::NumericalInstability(_) | SymmetrizeError::SelfadjointnessViolated { .. } => {
            Failure { code: 4, message, body: None }
        }
        _ => Failure::input(message),
    }
}

fn options(pol: &TolerancePolicy) -> SymmetrizeOptions {
    SymmetrizeOptions { pol: *pol, ..SymmetrizeOptions::default() }
}

fn certify<S: FieldScalar>(
    w: &Witness<S>,
    psi: &Matrix<S>,
    congruence: Option<&SignedCongruence<S>>,
    pol: &TolerancePolicy,
    verify: bool,
) -> Outcome {
    let residual = verify_congruence(&w.source, &w.target, psi, congruence.map(|c| &c.blocks[..]))
        .map_err(symmetrize_failure)?;
    if verify {
        let limit = if S::EXACT { 0.0 } else { pol.threshold(w.source.max_abs()) };
        if residual > limit {
            return Err(Failure {
                code: 4,
                message: format!("certificate residual {residual:e} exceeds {limit:e}"),
                body: None,
            });
        }
    }
    Ok(serde_json::to_value(certificate_to_doc(psi, congruence, residual)).expect("serializable"))
}

fn symmetrize_real_cmd<S: FieldScalar + RealScalar>(docs: &WitnessDocs, pol: &TolerancePolicy, verify: bool) -> Outcome {
    let w = docs.witness::<S>()?;
    let c = symmetrize_real(&w, &options(pol)).map_err(symmetrize_failure)?;
    certify(&w, &c.psi, Some(&c), pol, verify)
}

fn symmetrize_complex_cmd<S: FieldScalar + ComplexScalar>(docs: &WitnessDocs, pol: &TolerancePolicy, verify: bool) -> Outcome {
    let w = docs.witness::<S>()?;
    let psi = symmetrize_complex(&w, &options(pol)).map_err(symmetrize_failure)?;
    certify(&w, &psi, None, pol, verify)
}

fn check_witness_cmd<S: FieldScalar>(docs: &WitnessDocs, pol: &TolerancePolicy, full: bool) -> Outcome {
    let w = docs.witness::<S>()?;
    match check_witness_with(&w, pol, full).map_err(|e| Failure::input(e.to_string()))? {
        None => Ok(json!({ "valid": true })),
        Some(cx) => Err(Failure {
            code: 2,
            message: format!("reordering {:?} fails at {:?}", cx.assignment, cx.index),
            body: Some(json!({ "valid": false, "counterexample": counterexample_json(&cx) })),
        }),
    }
}

fn form_of<S: FieldScalar>(doc: &FormDoc) -> Result<MultiForm<S>, Failure> {
    form_from_doc(doc).map_err(|e| Failure::input(e.to_string()))
}

fn decompose_failure(e: DecomposeError) -> Failure {
    let message = e.to_string();
    match e {
        DecomposeError::OffDiagonalNonzero { .. }
        | DecomposeError::StripSplitsBlock { .. }
        | DecomposeError::CongruenceFailed { .. }
        | DecomposeError::BlockCountMismatch { .. }
        | DecomposeError::DimensionMismatch { .. } => Failure { code: 5, message, body: None },
        _ => Failure::input(message),
    }
}

fn decompose_cmd<S: FieldScalar>(doc: &FormDoc, pol: &TolerancePolicy, verify: bool) -> Outcome {
    let f = form_of::<S>(doc)?;
    let d = support_blocks(&f, pol);
    if verify {
        d.validate(&f, pol).map_err(|e| Failure { code: 4, message: e.to_string(), body: None })?;
    }
    Ok(serde_json::to_value(decomposition_to_doc(&d)).expect("serializable"))
}

fn align_cmd<S: FieldScalar>(
    doc: &FormDoc,
    d1: &DecompositionDoc,
    d2: &DecompositionDoc,
    pol: &TolerancePolicy,
    verify: bool,
) -> Outcome {
    let f = form_of::<S>(doc)?;
    let schema = |e: multiform_core::JsonError| Failure::input(e.to_string());
    let first = decomposition_from_doc::<S>(d1, f.dim()).map_err(schema)?;
    let second = decomposition_from_doc::<S>(d2, f.dim()).map_err(schema)?;
    for d in [&first, &second] {
        d.validate(&f, pol).map_err(decompose_failure)?;
    }
    let a = align_decompositions(&f, &first, &second, pol).map_err(decompose_failure)?;
    if verify {
        for (p, x) in a.congruences.iter().enumerate() {
            let q = a.permutation[p];
            let left = f.restrict(&second.blocks[q]).map_err(|e| Failure::input(e.to_string()))?;
            let right = f.restrict(&first.blocks[p]).and_then(|g| g.change_basis(x)).map_err(|e| Failure::input(e.to_string()))?;
            if !left.approx_eq(&right, pol) {
                return Err(Failure { code: 4, message: format!("block {p} congruence does not verify"), body: None });
            }
        }
    }
    Ok(json!({
        "field": S::FIELD,
        "permutation": a.permutation,
        "congruences": a.congruences.iter().map(matrix_to_doc).collect::<Vec<_>>(),
    }))
}

fn radical_cmd<S: FieldScalar>(doc: &FormDoc, pol: &TolerancePolicy) -> Outcome {
    let f = form_of::<S>(doc)?;
    let basis = f.radical(pol);
    Ok(json!({
        "field": S::FIELD,
        "dim": basis.len(),
        "basis": basis.iter().map(|v| v.iter().map(Scalar::format).collect::<Vec<_>>()).collect::<Vec<_>>(),
    }))
}

fn eval_cmd<S: FieldScalar>(doc: &FormDoc, vectors: &[Vec<String>]) -> Outcome {
    let f = form_of::<S>(doc)?;
    let xs: Vec<Vec<S>> = vectors
        .iter()
        .map(|v| v.iter().map(|s| S::parse(s)).collect::<Result<_, _>>())
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::input(e.to_string()))?;
    let value = f.eval(&xs).map_err(|e| Failure::input(e.to_string()))?;
    Ok(json!({ "field": S::FIELD, "value": value.format() }))
}

fn to_value(v: impl serde::Serialize) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn write_json(dir: &Path, name: &str, value: &impl serde::Serialize) -> Result<(), Failure> {
    let path = dir.join(name);
    let text = serde_json::to_string_pretty(value).expect("serializable") + "\n";
    fs::write(&path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn gen_cmd<S: FieldScalar>(spec: &GenSpec, kind: GenKind, dir: &Path) -> Outcome {
    let failed = |e: multiform_core::GenError| Failure::input(e.to_string());
    let mut files = Vec::new();
    let mut put = |name: &str, value: Value| -> Result<(), Failure> {
        write_json(dir, name, &value)?;
        files.push(name.to_string());
        Ok(())
    };
    let meta = match kind {
        GenKind::Witness => {
            let g = gen_witness::<S>(spec).map_err(failed)?;
            put("f.json", to_value(form_to_doc(&g.witness.source)))?;
            put("g.json", to_value(form_to_doc(&g.witness.target)))?;
            put("maps.json", to_value(maps_to_doc(&g.witness.maps)))?;
            json!({ "exponents": g.exponents, "negative_block": g.has_negative })
        }
        GenKind::Decomposable => {
            let g = gen_decomposable::<S>(spec).map_err(failed)?;
            put("form.json", to_value(form_to_doc(&g.form)))?;
            put("first.json", to_value(decomposition_to_doc(&g.first)))?;
            put("second.json", to_value(decomposition_to_doc(&g.second)))?;
            json!({ "permutation": g.permutation })
        }
        GenKind::Pair => {
            let g = gen_selfadjoint_pair::<S>(spec).map_err(failed)?;
            put("form.json", to_value(form_to_doc(&g.form)))?;
            put("map.json", to_value(maps_to_doc(std::slice::from_ref(&g.map))))?;
            json!({ "block_dims": g.block_dims })
        }
    };
    put("meta.json", meta)?;
    Ok(json!({ "dir": dir.display().to_string(), "files": files }))
}
