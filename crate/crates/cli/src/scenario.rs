//! Scenario documents: `{"task": ..., "params": {...}, "seed": n, "budget": n}`.

use detgerbe::exact_linalg::{parse_scalar, scalar_to_string, Scalar};
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    Cohomology,
    Transgression,
    CentralExtension,
    Fock,
    GerbalExtract,
    GerbalPair,
    DoubleLoop,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Cohomology => "cohomology",
            TaskKind::Transgression => "transgression",
            TaskKind::CentralExtension => "central-extension",
            TaskKind::Fock => "fock",
            TaskKind::GerbalExtract => "gerbal-extract",
            TaskKind::GerbalPair => "gerbal-pair",
            TaskKind::DoubleLoop => "double-loop",
        }
    }
}

/// The typed shape of a scenario; used for the published schema.
#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
pub struct ScenarioDocument {
    #[serde(flatten)]
    pub task: Task,
    /// Seed for randomized sampling; `--seed` overrides it.
    pub seed: Option<u64>,
    /// Work limit for the task's dominant loop; `--budget` overrides it.
    pub budget: Option<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "task", content = "params", rename_all = "kebab-case")]
pub enum Task {
    Cohomology(CohomologyParams),
    Transgression(TransgressionParams),
    CentralExtension(CentralExtensionParams),
    Fock(FockParams),
    GerbalExtract(GerbalParams),
    GerbalPair(PairParams),
    DoubleLoop(DoubleLoopParams),
}

impl Task {
    pub fn kind(&self) -> TaskKind {
        match self {
            Task::Cohomology(_) => TaskKind::Cohomology,
            Task::Transgression(_) => TaskKind::Transgression,
            Task::CentralExtension(_) => TaskKind::CentralExtension,
            Task::Fock(_) => TaskKind::Fock,
            Task::GerbalExtract(_) => TaskKind::GerbalExtract,
            Task::GerbalPair(_) => TaskKind::GerbalPair,
            Task::DoubleLoop(_) => TaskKind::DoubleLoop,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum GroupSpec {
    Cyclic(usize),
    /// Cayley table; row `a`, column `b` holds `a·b`, element 0 is the identity.
    Table(Vec<Vec<usize>>),
    Product(Box<GroupSpec>, Box<GroupSpec>),
    Quaternion,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum ModuleSpec {
    /// `Z/m` with trivial action.
    Trivial(i64),
    /// `⊕ Z/factors[i]` with one integer matrix per group element.
    Twisted { factors: Vec<i64>, action: Vec<Vec<Vec<i64>>> },
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct CohomologyParams {
    pub group: GroupSpec,
    pub module: ModuleSpec,
    pub degree: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum ExtensionPreset {
    /// `(Z/2)² ⋊ Z/n` with the Heisenberg extension of `(Z/2)²`.
    HeisenbergSwap(usize),
    /// `Q8 ⊃ ⟨i⟩` with the `Z/8` carry extension.
    QuaternionCarry,
    /// `G` given by a table, `H` by its elements, and a normalized
    /// 2-cocycle `a: H × H → Z/m` indexed by positions in `normal`.
    Custom { group: GroupSpec, normal: Vec<usize>, modulus: i64, cocycle: Vec<Vec<i64>> },
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct TransgressionParams {
    pub extension: ExtensionPreset,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct CentralExtensionParams {
    /// `[low, high)` exponents of the window in `Q((t))`.
    pub window: (i64, i64),
    pub pairs: usize,
    pub triples: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct FockParams {
    pub window: (i64, i64),
    /// Each lattice is a list of rows of exact rationals (`"num/den"`).
    pub lattices: Vec<Vec<Vec<ExactScalar>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum GerbalSpecInput {
    /// The tautological action of the 2-group `(Z/n, μ_n, k·ω)`, ω the
    /// generator of `H³(Z/n, μ_n)` found by the solver.
    TwoGroup { n: usize, class: i64 },
    /// Trivialized category; `c[g][h][x] = "k mod n"`.
    Explicit { group: GroupSpec, blocks: Vec<usize>, maps: Vec<Vec<usize>>, c: Vec<Vec<Vec<ExactRoot>>> },
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct GerbalParams {
    pub spec: GerbalSpecInput,
    /// Read the cocycle in `μ_n` diagonally embedded in the center.
    pub modulus: i64,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum PairPreset {
    HeisenbergSwap(usize),
    QuaternionCarry,
    InnerHeisenberg(usize),
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PairParams {
    pub pair: PairPreset,
    /// Levels λ for the representation-category route.
    #[serde(default)]
    pub levels: Vec<i64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    ShiftS(i64),
    ShiftT(i64),
    /// `a·t^i = Σ_j s^j t^(i-j)`, truncated to the window.
    Mixing,
    Rotation,
    /// Full matrix on the monomial basis, rows of exact rationals.
    Matrix(Vec<Vec<ExactScalar>>),
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Generator {
    pub name: String,
    pub kind: GeneratorKind,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum LatticeSpec {
    /// `Q[[t]]` on level 0 plus the full levels above.
    L0,
    /// `Q((t))[[s]]`.
    OK,
    /// `(level j, lowest t-exponent m)` per level.
    Tails(Vec<(i64, i64)>),
    /// Monomials `t^i s^j`.
    Monomials(Vec<(i64, i64)>),
    Rows(Vec<Vec<ExactScalar>>),
    Sum(Vec<LatticeSpec>),
    Intersect(Vec<LatticeSpec>),
    Apply { generator: String, to: Box<LatticeSpec> },
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, JsonSchema, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum SampleMode {
    Words,
    Cyclic,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, JsonSchema, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum TopologySpec {
    STail,
    Cyclic,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, JsonSchema, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ChoiceSpec {
    Canonical,
    Random,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct DoubleLoopParams {
    pub t_window: (i64, i64),
    pub s_window: (i64, i64),
    pub generators: Vec<Generator>,
    pub mode: SampleMode,
    /// Word length cap (words mode) or order cap (cyclic mode, which samples
    /// the subgroup generated by the first generator).
    pub cap: usize,
    pub base: Vec<LatticeSpec>,
    #[serde(default = "default_big")]
    pub big_lattice: LatticeSpec,
    #[serde(default = "default_topology")]
    pub topology: TopologySpec,
    #[serde(default = "default_choice")]
    pub choices: ChoiceSpec,
}

fn default_big() -> LatticeSpec {
    LatticeSpec::OK
}
fn default_topology() -> TopologySpec {
    TopologySpec::STail
}
fn default_choice() -> ChoiceSpec {
    ChoiceSpec::Canonical
}

/// An exact rational written as a string, `"-3/4"` or `"5"`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactScalar(pub Scalar);

impl Serialize for ExactScalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&scalar_to_string(&self.0))
    }
}

impl<'de> Deserialize<'de> for ExactScalar {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let v = parse_scalar(&s).ok_or_else(|| serde::de::Error::custom(format!("not an exact rational: {s:?}")))?;
        Ok(ExactScalar(v))
    }
}

impl JsonSchema for ExactScalar {
    fn schema_name() -> String {
        "ExactScalar".into()
    }
    fn json_schema(_: &mut schemars::gen::SchemaGenerator) -> schemars::schema::Schema {
        schemars::schema::SchemaObject {
            instance_type: Some(schemars::schema::InstanceType::String.into()),
            string: Some(Box::new(schemars::schema::StringValidation { pattern: Some(r"^-?[0-9]+(/[0-9]+)?$".into()), ..Default::default() })),
            ..Default::default()
        }
        .into()
    }
}

/// `"k mod n"`: the root of unity `exp(2πik/n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExactRoot {
    pub k: i64,
    pub n: i64,
}

impl fmt::Display for ExactRoot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.k, self.n)
    }
}

impl Serialize for ExactRoot {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExactRoot {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let bad = || serde::de::Error::custom(format!("expected \"k mod n\" with n > 0, got {s:?}"));
        let (k, n) = s.split_once("mod").ok_or_else(bad)?;
        let k: i64 = k.trim().parse().map_err(|_| bad())?;
        let n: i64 = n.trim().parse().map_err(|_| bad())?;
        if n <= 0 {
            return Err(bad());
        }
        Ok(ExactRoot { k: k.rem_euclid(n), n })
    }
}

impl JsonSchema for ExactRoot {
    fn schema_name() -> String {
        "ExactRoot".into()
    }
    fn json_schema(_: &mut schemars::gen::SchemaGenerator) -> schemars::schema::Schema {
        schemars::schema::SchemaObject {
            instance_type: Some(schemars::schema::InstanceType::String.into()),
            string: Some(Box::new(schemars::schema::StringValidation { pattern: Some(r"^-?[0-9]+ mod [1-9][0-9]*$".into()), ..Default::default() })),
            ..Default::default()
        }
        .into()
    }
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub task: Task,
    pub seed: Option<u64>,
    pub budget: Option<u64>,
    /// The `params` object as given, echoed into the report.
    pub params: serde_json::Value,
}

#[derive(Debug, PartialEq, Eq)]
pub enum ParseError {
    Syntax { line: usize, column: usize, message: String },
    Field { path: String, message: String },
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Syntax { line, column, message } => write!(f, "syntax error at line {line}, column {column}: {message}"),
            ParseError::Field { path, message } => write!(f, "invalid field `{path}`: {message}"),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    task: TaskKind,
    #[serde(default)]
    params: serde_json::Value,
    seed: Option<u64>,
    budget: Option<u64>,
}

fn typed<T: serde::de::DeserializeOwned>(v: &serde_json::Value, prefix: &str) -> Result<T, ParseError> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let inner = e.path().to_string();
        let path = if inner == "." { prefix.to_string() } else { format!("{prefix}.{inner}") };
        ParseError::Field { path, message: e.into_inner().to_string() }
    })
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ParseError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| {
            let full = e.to_string();
            // serde_json appends the location, which is reported separately
            let message = full.rsplit_once(" at line ").map_or(full.as_str(), |(m, _)| m).to_string();
            ParseError::Syntax { line: e.line(), column: e.column(), message }
        })?;
    let header: Header = serde_path_to_error::deserialize(&value).map_err(|e| {
        let path = e.path().to_string();
        ParseError::Field { path: if path == "." { "task".into() } else { path }, message: e.into_inner().to_string() }
    })?;
    let p = &header.params;
    let task = match header.task {
        TaskKind::Cohomology => Task::Cohomology(typed(p, "params")?),
        TaskKind::Transgression => Task::Transgression(typed(p, "params")?),
        TaskKind::CentralExtension => Task::CentralExtension(typed(p, "params")?),
        TaskKind::Fock => Task::Fock(typed(p, "params")?),
        TaskKind::GerbalExtract => Task::GerbalExtract(typed(p, "params")?),
        TaskKind::GerbalPair => Task::GerbalPair(typed(p, "params")?),
        TaskKind::DoubleLoop => Task::DoubleLoop(typed(p, "params")?),
    };
    if header.budget == Some(0) {
        return Err(ParseError::Field { path: "budget".into(), message: "budget must be positive".into() });
    }
    validate(&task)?;
    Ok(Scenario { task, seed: header.seed, budget: header.budget, params: header.params })
}

fn field(path: &str, message: impl Into<String>) -> ParseError {
    ParseError::Field { path: path.into(), message: message.into() }
}

fn positive(path: &str, v: i64) -> Result<(), ParseError> {
    if v <= 0 {
        return Err(field(path, format!("must be positive, got {v}")));
    }
    Ok(())
}

fn even(path: &str, n: usize) -> Result<(), ParseError> {
    if n == 0 || n % 2 == 1 {
        return Err(field(path, format!("K = Z/n acts through Z/2, so n must be even and positive, got {n}")));
    }
    Ok(())
}

fn window(path: &str, (lo, hi): (i64, i64)) -> Result<(), ParseError> {
    if !(lo < 0 && 0 <= hi) {
        return Err(field(path, format!("need low < 0 <= high, got [{lo}, {hi})")));
    }
    Ok(())
}

fn group(path: &str, g: &GroupSpec) -> Result<(), ParseError> {
    match g {
        GroupSpec::Cyclic(n) => positive(&format!("{path}.cyclic"), *n as i64),
        GroupSpec::Table(t) => {
            if t.is_empty() || t.iter().any(|r| r.len() != t.len()) {
                return Err(field(&format!("{path}.table"), "must be a non-empty square table"));
            }
            Ok(())
        }
        GroupSpec::Product(a, b) => {
            group(&format!("{path}.product[0]"), a)?;
            group(&format!("{path}.product[1]"), b)
        }
        GroupSpec::Quaternion => Ok(()),
    }
}

fn validate(task: &Task) -> Result<(), ParseError> {
    match task {
        Task::Cohomology(c) => {
            group("params.group", &c.group)?;
            match &c.module {
                ModuleSpec::Trivial(m) => positive("params.module.trivial", *m),
                ModuleSpec::Twisted { factors, .. } => {
                    for (i, f) in factors.iter().enumerate() {
                        positive(&format!("params.module.twisted.factors[{i}]"), *f)?;
                    }
                    Ok(())
                }
            }
        }
        Task::Transgression(t) => match &t.extension {
            ExtensionPreset::HeisenbergSwap(n) => even("params.extension.heisenberg-swap", *n),
            ExtensionPreset::QuaternionCarry => Ok(()),
            ExtensionPreset::Custom { group: g, modulus, .. } => {
                group("params.extension.custom.group", g)?;
                positive("params.extension.custom.modulus", *modulus)
            }
        },
        Task::CentralExtension(c) => {
            window("params.window", c.window)?;
            if c.window.1 < 1 {
                return Err(field("params.window", "need high >= 1 so GL_f elements fit"));
            }
            positive("params.pairs", c.pairs as i64)
        }
        Task::Fock(f) => {
            window("params.window", f.window)?;
            let dim = (f.window.1 - f.window.0) as usize;
            if dim > 6 {
                return Err(field("params.window", format!("Fock modules need dimension <= 6, got {dim}")));
            }
            for (i, l) in f.lattices.iter().enumerate() {
                for (j, r) in l.iter().enumerate() {
                    if r.len() != dim {
                        return Err(field(&format!("params.lattices[{i}][{j}]"), format!("row length {} != window dimension {dim}", r.len())));
                    }
                }
            }
            Ok(())
        }
        Task::GerbalExtract(g) => {
            positive("params.modulus", g.modulus)?;
            match &g.spec {
                GerbalSpecInput::TwoGroup { n, .. } => positive("params.spec.two-group.n", *n as i64),
                GerbalSpecInput::Explicit { group: gs, .. } => group("params.spec.explicit.group", gs),
            }
        }
        Task::GerbalPair(p) => match p.pair {
            PairPreset::HeisenbergSwap(n) => even("params.pair.heisenberg-swap", n),
            PairPreset::InnerHeisenberg(p) if p < 2 => Err(field("params.pair.inner-heisenberg", format!("need p >= 2, got {p}"))),
            PairPreset::InnerHeisenberg(_) => Ok(()),
            PairPreset::QuaternionCarry => Ok(()),
        },
        Task::DoubleLoop(d) => {
            window("params.t_window", d.t_window)?;
            window("params.s_window", d.s_window)?;
            positive("params.cap", d.cap as i64)?;
            let mut names = std::collections::BTreeSet::new();
            for (i, g) in d.generators.iter().enumerate() {
                if !names.insert(g.name.as_str()) {
                    return Err(field(&format!("params.generators[{i}].name"), format!("duplicate generator {:?}", g.name)));
                }
            }
            if d.generators.is_empty() {
                return Err(field("params.generators", "need at least one generator"));
            }
            for (i, b) in d.base.iter().enumerate() {
                lattice_refs(&format!("params.base[{i}]"), b, &names)?;
            }
            lattice_refs("params.big_lattice", &d.big_lattice, &names)
        }
    }
}

fn lattice_refs(path: &str, l: &LatticeSpec, names: &std::collections::BTreeSet<&str>) -> Result<(), ParseError> {
    match l {
        LatticeSpec::Sum(xs) | LatticeSpec::Intersect(xs) => {
            for (i, x) in xs.iter().enumerate() {
                lattice_refs(&format!("{path}[{i}]"), x, names)?;
            }
            Ok(())
        }
        LatticeSpec::Apply { generator, to } => {
            if !names.contains(generator.as_str()) {
                return Err(field(&format!("{path}.apply.generator"), format!("unknown generator {generator:?}")));
            }
            lattice_refs(&format!("{path}.apply.to"), to, names)
        }
        _ => Ok(()),
    }
}
