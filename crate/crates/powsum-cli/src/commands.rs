use std::path::Path;
use std::sync::Arc;

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use powsum::algebra::{Field, FieldSpec, Matrix, PrimeField, Rationals};
use powsum::appmeasure::{self, HardPolySpec, Regime};
use powsum::blackbox::{random_point, BlackBox, Opaque, PolyBox};
use powsum::decomp::{coords_to_json, decompose_coords, OperatorSet, OperatorSetJson};
use powsum::gaussians::{learn_mixture, GaussianMixture, MixtureJson, MixtureParams, MomentInput, MomentTable};
use powsum::learner::{learn, CircuitJson, LearnerConfig, ParamMode, Params, PowerSumCircuit};
use powsum::multipoly::{SparsePoly, SparsePolyJson};
use powsum::witness::{build_explicit_witness, check_nondegeneracy, check_nondegeneracy_with, random_circuit, ExplicitWitnessJson};
use powsum::Error;

use crate::manifest::{self, RunManifest};
use crate::{render, CliError, Command, RegimeArg, Shape};

/// `2^127 - 1`.
pub const DEFAULT_PRIME: &str = "170141183460469231731687303715884105727";

pub enum Product {
    /// A JSON result and the exit code its verdict calls for.
    Json { result: Value, code: u8 },
    Table(String),
}

impl Product {
    fn ok(result: impl Serialize) -> Result<Self, CliError> {
        Ok(Product::Json { result: to_value(result)?, code: 0 })
    }

    pub fn code(&self) -> u8 {
        match self {
            Product::Json { code, .. } => *code,
            Product::Table(_) => 0,
        }
    }

    pub fn render(&self, m: &RunManifest) -> String {
        match self {
            Product::Json { result, .. } => {
                let doc = json!({ "manifest": m, "manifest_hash": m.hash(), "result": result });
                serde_json::to_string_pretty(&doc).expect("json") + "\n"
            }
            Product::Table(body) => format!(
                "# manifest {}\n# manifest_hash {}\n{body}",
                serde_json::to_string(m).expect("json"),
                m.hash()
            ),
        }
    }
}

fn to_value(v: impl Serialize) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Io(format!("serialization failed: {e}")))
}

fn from_value<T: for<'de> Deserialize<'de>>(v: Value, what: &str) -> Result<T, CliError> {
    serde_json::from_value(v).map_err(|e| CliError::Io(format!("not a valid {what}: {e}")))
}

/// Runs `$body` with `$f` bound to the field named by `$spec`.
macro_rules! with_field {
    ($spec:expr, |$f:ident| $body:expr) => {{
        match $spec {
            FieldSpec::Rational => {
                let $f = Rationals;
                $body
            }
            FieldSpec::Prime(p) => match p.bits() {
                0..=64 => {
                    let $f = PrimeField::<1>::new(&p)?;
                    $body
                }
                65..=128 => {
                    let $f = PrimeField::<2>::new(&p)?;
                    $body
                }
                129..=192 => {
                    let $f = PrimeField::<3>::new(&p)?;
                    $body
                }
                193..=256 => {
                    let $f = PrimeField::<4>::new(&p)?;
                    $body
                }
                b => Err(CliError::Lib(Error::InvalidField(format!("primes above 256 bits are not supported, got {b} bits")))),
            },
        }
    }};
}

fn prime_arg(s: Option<&str>) -> Result<FieldSpec, CliError> {
    let s = s.unwrap_or(DEFAULT_PRIME);
    let p: BigUint = s.trim().parse().map_err(|e| CliError::Io(format!("--prime {s}: {e}")))?;
    Ok(FieldSpec::Prime(p))
}

fn field_label(spec: &FieldSpec) -> String {
    match spec {
        FieldSpec::Prime(p) => format!("F_{p}"),
        FieldSpec::Rational => "Q".into(),
    }
}

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Reads JSON and strips the envelope of a previous powsum output.
fn read_json(man: &mut RunManifest, path: &Path) -> Result<Value, CliError> {
    let text = man.read_input(path)?;
    let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(match v {
        Value::Object(mut o) if o.contains_key("manifest") && o.contains_key("result") => o.remove("result").unwrap_or_default(),
        other => other,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct PolyFile {
    field: FieldSpec,
    poly: SparsePolyJson,
}

enum PolyInput {
    Circuit(CircuitJson),
    Witness(ExplicitWitnessJson),
    Poly(PolyFile),
}

impl PolyInput {
    fn read(man: &mut RunManifest, path: &Path) -> Result<Self, CliError> {
        let mut v = read_json(man, path)?;
        if let Some(model) = v.get_mut("model") {
            v = model.take();
        }
        if v.get("circuit").is_some() {
            Ok(PolyInput::Witness(from_value(v, "witness")?))
        } else if v.get("poly").is_some() {
            Ok(PolyInput::Poly(from_value(v, "polynomial file")?))
        } else {
            Ok(PolyInput::Circuit(from_value(v, "circuit")?))
        }
    }

    fn field(&self) -> FieldSpec {
        match self {
            PolyInput::Circuit(c) => c.field.clone(),
            PolyInput::Witness(w) => w.circuit.field.clone(),
            PolyInput::Poly(p) => p.field.clone(),
        }
    }

    fn circuit(self) -> Result<CircuitJson, CliError> {
        match self {
            PolyInput::Circuit(c) => Ok(c),
            PolyInput::Witness(w) => Ok(w.circuit),
            PolyInput::Poly(_) => Err(CliError::Io("expected a circuit, got a bare polynomial".into())),
        }
    }
}

fn parse_matrix<F: Field>(f: &F, rows: &[Vec<String>]) -> Result<Matrix<F>, CliError> {
    let rows = rows
        .iter()
        .map(|r| r.iter().map(|x| f.parse(x)).collect::<powsum::Result<Vec<_>>>())
        .collect::<powsum::Result<Vec<_>>>()?;
    Ok(Matrix::from_rows(f, rows)?)
}

pub fn run(cmd: &Command, man: &mut RunManifest) -> Result<Product, CliError> {
    match cmd {
        Command::GenRandom { shape, s, seed, prime } => {
            let spec = prime_arg(prime.as_deref())?;
            man.field = Some(field_label(&spec));
            with_field!(spec, |f| {
                let c = random_circuit(&f, shape.n, shape.d, shape.t, *s, &mut rng(seed.seed))?;
                Product::ok(c.to_json())
            })
        }
        Command::GenWitness { shape, s, k, n0, seed, prime } => {
            let spec = prime_arg(prime.as_deref())?;
            man.field = Some(field_label(&spec));
            with_field!(spec, |f| {
                let w = build_explicit_witness(&f, shape.n, shape.d, shape.t, *s, *k, *n0, &mut rng(seed.seed))?;
                Product::ok(w.to_json())
            })
        }
        Command::CheckNondegen { input, k, n0, m0, seed } => {
            let inp = PolyInput::read(man, input)?;
            let spec = inp.field();
            man.field = Some(field_label(&spec));
            with_field!(spec, |f| check_nondegen(&f, &inp, *k, *n0, *m0, seed.seed))
        }
        Command::Learn { input, s, seed, k, n0, m0, auto_params: _, prime, opaque } => {
            let mut cj = PolyInput::read(man, input)?.circuit()?;
            if let Some(p) = prime {
                let target = prime_arg(Some(p))?;
                match &cj.field {
                    FieldSpec::Rational => cj.field = target,
                    other if *other == target => {}
                    other => {
                        return Err(CliError::Io(format!(
                            "--prime {p} differs from the circuit's field {}",
                            field_label(other)
                        )))
                    }
                }
            }
            let mode = match (k, n0, m0) {
                (Some(k), Some(n0), Some(m0)) => ParamMode::Explicit(Params { n0: *n0, m0: *m0, k: *k }),
                _ => ParamMode::Auto,
            };
            let spec = cj.field.clone();
            man.field = Some(field_label(&spec));
            with_field!(spec, |f| learn_cmd(&f, &cj, *s, seed.seed, mode, *opaque))
        }
        Command::Verify { circuit, model, points, seed } => {
            let a = PolyInput::read(man, circuit)?.circuit()?;
            let b = PolyInput::read(man, model)?.circuit()?;
            if a.field != b.field {
                return Err(CliError::Io("circuit and model live over different fields".into()));
            }
            let spec = a.field.clone();
            man.field = Some(field_label(&spec));
            with_field!(spec, |f| verify_cmd(&f, &a, &b, *points, seed.seed))
        }
        Command::AppMeasure { input, k, n0, trials, black_box, seed } => {
            let inp = PolyInput::read(man, input)?;
            let spec = inp.field();
            man.field = Some(field_label(&spec));
            with_field!(spec, |f| app_measure_cmd(&f, &inp, *k, *n0, *trials, *black_box, seed.seed))
        }
        Command::HardPoly { shape, regime, k, n0, trials, seed, prime } => {
            let spec = prime_arg(prime.as_deref())?;
            man.field = Some(field_label(&spec));
            with_field!(spec, |f| hard_poly_cmd(&f, shape, *regime, *k, *n0, *trials, seed.seed))
        }
        Command::Bounds { shape, s } => Product::ok(appmeasure::bound_report(shape.n, shape.d, shape.t, *s)?),
        Command::GaussianMoments { mixture, order, points, bound, seed } => {
            let g = read_mixture(man, mixture)?;
            if *order == 0 || order % 2 == 1 {
                return Err(CliError::Io(format!("--order must be a positive even number, got {order}")));
            }
            let mut r = rng(seed.seed);
            let pts: Vec<_> = (0..*points).map(|_| powsum::gaussians::random_rational_point(g.n, *bound, &mut r)).collect();
            let orders: Vec<usize> = (2..=*order).step_by(2).collect();
            Ok(Product::Table(MomentTable::from_oracle(&g, &pts, &orders)?.format()))
        }
        Command::GaussianLearn { input, s, m, seed } => {
            let text = man.read_input(input)?;
            let (mixture, table);
            let source = if text.trim_start().starts_with('{') {
                mixture = mixture_from_text(&text)?;
                MomentInput::Mixture(&mixture)
            } else {
                table = MomentTable::parse(&text)?;
                MomentInput::Table(&table)
            };
            let mut params = MixtureParams::new(source.dim(), *s);
            if let Some(m) = m {
                params = params.with_m(*m)?;
            }
            let rec = learn_mixture(source, *s, &params, &mut rng(seed.seed))?;
            Product::ok(json!({ "mixture": rec.mixture.to_json(), "report": rec.report }))
        }
        Command::Decompose { instance, seed } => {
            let v = read_json(man, instance)?;
            let spec: FieldSpec = from_value(v.get("field").cloned().unwrap_or_default(), "field spec")?;
            let ops: OperatorSetJson = from_value(v, "operator instance")?;
            man.field = Some(field_label(&spec));
            with_field!(spec, |f| {
                let set = OperatorSet::from_json(&f, &ops)?;
                let (split, comps) = decompose_coords(&set, &mut rng(seed.seed))?;
                Product::ok(coords_to_json(&f, &split, &comps))
            })
        }
        Command::Replay { .. } => Err(CliError::Io("a replay cannot be replayed".into())),
    }
}

fn check_nondegen<F: Field>(
    f: &F,
    inp: &PolyInput,
    k: Option<usize>,
    n0: Option<usize>,
    m0: usize,
    seed: u64,
) -> Result<Product, CliError> {
    let mut r = rng(seed);
    let report = match inp {
        PolyInput::Circuit(cj) => {
            let (Some(k), Some(n0)) = (k, n0) else {
                return Err(CliError::Io("--k and --n0 are required unless the input is a witness".into()));
            };
            check_nondegeneracy(&PowerSumCircuit::from_json(f, cj)?, k, n0, m0, &mut r)?
        }
        PolyInput::Witness(w) => {
            let c = PowerSumCircuit::from_json(f, &w.circuit)?;
            let l = parse_matrix(f, &w.l)?;
            if n0.is_some_and(|n0| n0 != l.cols()) {
                return Err(CliError::Io(format!("the witness projects to {} variables", l.cols())));
            }
            let p = Matrix::random(f, l.cols(), m0, &mut r);
            check_nondegeneracy_with(&c, k.unwrap_or(w.k), &l, &p)?
        }
        PolyInput::Poly(_) => return Err(CliError::Io("non-degeneracy needs a circuit, not a bare polynomial".into())),
    };
    let j = report.to_json();
    let code = if j.non_degenerate { 0 } else { 2 };
    Ok(Product::Json { result: to_value(j)?, code })
}

fn learn_cmd<F: Field>(f: &F, cj: &CircuitJson, s: usize, seed: u64, mode: ParamMode, opaque: bool) -> Result<Product, CliError> {
    let c = PowerSumCircuit::from_json(f, cj)?;
    let mut oracle = c.oracle();
    if opaque {
        oracle = Arc::new(Opaque::new(oracle));
    }
    let config = LearnerConfig { mode, seed, ..LearnerConfig::default() };
    let model = learn(oracle, c.t * c.m, c.t, s, &config)?;
    Product::ok(json!({ "model": model.to_circuit(c.n, c.t, c.m)?.to_json(), "report": model.report }))
}

fn verify_cmd<F: Field>(f: &F, a: &CircuitJson, b: &CircuitJson, points: usize, seed: u64) -> Result<Product, CliError> {
    let (a, b) = (PowerSumCircuit::from_json(f, a)?, PowerSumCircuit::from_json(f, b)?);
    if a.n != b.n {
        return Err(CliError::Io(format!("circuit has {} variables, model has {}", a.n, b.n)));
    }
    let mut r = rng(seed);
    let mut mismatches = 0;
    for _ in 0..points {
        let x = random_point(f, a.n, &mut r);
        if a.evaluate(&x)? != b.evaluate(&x)? {
            mismatches += 1;
        }
    }
    let pass = mismatches == 0;
    let result = json!({ "verdict": if pass { "PASS" } else { "FAIL" }, "points": points, "mismatches": mismatches });
    Ok(Product::Json { result, code: if pass { 0 } else { 1 } })
}

fn app_measure_cmd<F: Field>(
    f: &F,
    inp: &PolyInput,
    k: usize,
    n0: usize,
    trials: usize,
    black_box: bool,
    seed: u64,
) -> Result<Product, CliError> {
    let mut r = rng(seed);
    let circuit = match inp {
        PolyInput::Circuit(c) => Some(PowerSumCircuit::from_json(f, c)?),
        PolyInput::Witness(w) => Some(PowerSumCircuit::from_json(f, &w.circuit)?),
        PolyInput::Poly(_) => None,
    };
    let poly = || -> Result<SparsePoly<F>, CliError> {
        Ok(match (&circuit, inp) {
            (Some(c), _) => c.expand(),
            (None, PolyInput::Poly(p)) => SparsePoly::from_json(f, &p.poly)?,
            (None, _) => unreachable!("circuits are parsed above"),
        })
    };
    let dimension = if black_box {
        let oracle: BlackBox<F> = match &circuit {
            Some(c) => Arc::new(Opaque::new(c.oracle())),
            None => Arc::new(Opaque::new(Arc::new(PolyBox::new(poly()?)))),
        };
        appmeasure::app_measure_oracle(&oracle, k, n0, trials, &mut r)?
    } else {
        appmeasure::app_measure(&poly()?, k, n0, trials, &mut r)?
    };
    Product::ok(json!({
        "k": k,
        "n0": n0,
        "trials": trials,
        "method": if black_box { "black_box" } else { "symbolic" },
        "dimension": dimension,
    }))
}

fn hard_poly_cmd<F: Field>(
    f: &F,
    shape: &Shape,
    regime: RegimeArg,
    k: Option<usize>,
    n0: Option<usize>,
    trials: usize,
    seed: u64,
) -> Result<Product, CliError> {
    let regime = match regime {
        RegimeArg::HighT => Regime::HighT,
        RegimeArg::LowT => Regime::LowT,
    };
    let params = appmeasure::regime_params(shape.n, shape.d, shape.t, regime)?;
    let spec = HardPolySpec { n: shape.n, d: shape.d, t: shape.t, k: k.unwrap_or(params.k), n0: n0.unwrap_or(params.n0) };
    if let Some(why) = spec.infeasibility() {
        return Err(Error::Infeasible(why).into());
    }
    let verdict = appmeasure::verify_hard_poly(f, &spec, trials, &mut rng(seed))?;
    let poly = appmeasure::hard_polynomial(f, &spec)?;
    let code = if verdict.equal { 0 } else { 1 };
    let result = json!({
        "regime": params,
        "spec": spec,
        "field": f.spec(),
        "poly": poly.to_json(),
        "verdict": verdict,
    });
    Ok(Product::Json { result, code })
}

fn mixture_from_text(text: &str) -> Result<GaussianMixture, CliError> {
    let mut v: Value = serde_json::from_str(text).map_err(|e| CliError::Io(format!("mixture: {e}")))?;
    if let Some(r) = v.get_mut("result") {
        v = r.take();
    }
    if let Some(m) = v.get_mut("mixture") {
        v = m.take();
    }
    let j: MixtureJson = from_value(v, "mixture")?;
    Ok(GaussianMixture::from_json(&j)?)
}

fn read_mixture(man: &mut RunManifest, path: &Path) -> Result<GaussianMixture, CliError> {
    let text = man.read_input(path)?;
    mixture_from_text(&text)
}

/// Reruns the command recorded in `output` after checking its inputs are
/// unchanged, and compares the regenerated bytes with the file.
pub fn replay(output: &Path) -> Result<String, CliError> {
    let old = std::fs::read_to_string(output).map_err(|e| CliError::Io(format!("{}: {e}", output.display())))?;
    let recorded = manifest::extract(&old)?;
    for inp in &recorded.inputs {
        let bytes = std::fs::read(&inp.path).map_err(|e| CliError::Io(format!("{}: {e}", inp.path)))?;
        if manifest::sha256_hex(&bytes) != inp.sha256 {
            return Err(CliError::Io(format!("input {} changed since the recorded run", inp.path)));
        }
    }
    let mut argv = vec!["powsum".to_string()];
    argv.extend(recorded.argv.iter().cloned());
    // An explicit --seed in the recorded arguments still takes precedence.
    if let Some(seed) = recorded.seed {
        std::env::set_var("POWSUM_SEED", seed.to_string());
    }
    let cli = <crate::Cli as clap::Parser>::try_parse_from(&argv)
        .map_err(|e| CliError::Io(format!("recorded arguments no longer parse: {e}")))?;
    let fresh = render(&cli.command, recorded.argv.clone()).or_else(|e| match e {
        CliError::Verdict { output, .. } => Ok(output),
        other => Err(other),
    })?;
    if fresh == old {
        Ok(fresh)
    } else {
        let result = json!({ "replay": output.display().to_string(), "identical": false });
        Err(CliError::Verdict { output: serde_json::to_string_pretty(&result).expect("json") + "\n", code: 1 })
    }
}
