//! The family-description file format.
//!
//! A file is line-oriented with three section kinds. Lines starting with
//! `#` and blank lines are ignored. The first meaningful line must be the
//! version header `vfold-spec 1`.
//!
//! ```text
//! vfold-spec 1
//!
//! [family]
//! x = x, y, z            # coordinate names
//! t = t                  # family parameter names (may be empty)
//! F = z^5 + t*y^6*z + y^7*x + x^15
//! rho = x^2 + y^2 + z^2  # optional; defaults to the sum of x-squares
//! weights = 1, 2, 3 ; 15 # optional quasihomogeneous type (w_1..w_n ; D)
//! order = 90             # default series truncation order (default 64)
//!
//! [arc gamma]
//! param = s              # series parameter symbol (default s)
//! unknown = L : 4        # optional unit series solved from F∘γ ≡ 0
//! x = L*s^5              # one entry per declared variable; polynomial
//! y = s^5                # text in the unknown (if any) and the parameter
//! z = s^8
//! t = -5*s^2
//!
//! [tasks]
//! mu-weighted
//! mu-profile samples = 0, 1, -1
//! section z = x + y ; swap = x z ; samples = 0, 1
//! whitney arc = gamma ; note = free text recorded in the report
//! fold arc = gamma
//! transform arc = gamma
//! radius at = 1 ; epsilon = 1 ; budget = 200 ; seed = 0
//! ```
//!
//! Task lines start with the task kind followed by `key = value` pairs
//! separated by `;`. A `note = …` pair must come last: its value runs to
//! the end of the line and is recorded verbatim in the report. Rationals
//! are written as `p`, `-p`, or `p/q`.

use num_bigint::BigInt;
use thiserror::Error;
use vfold_core::poly::{Context, ContextRef, Polynomial, WeightSystem};
use vfold_core::text::{parse_polynomial, ParseError};
use vfold_core::BigRational;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("line {line}: expected header `vfold-spec 1`")]
    BadHeader { line: usize },
    #[error("line {line}: unknown section `{name}`")]
    UnknownSection { line: usize, name: String },
    #[error("line {line}: `{text}` is not a `key = value` entry")]
    BadEntry { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate {what}")]
    Duplicate { line: usize, what: String },
    #[error("missing [family] section or `F =` entry")]
    MissingFamily,
    #[error("line {line}: arc `{arc}` has no entry for variable `{var}`")]
    MissingArcComponent { line: usize, arc: String, var: String },
    #[error("line {line}: bad rational `{text}`")]
    BadRational { line: usize, text: String },
    #[error("line {line}: bad integer `{text}`")]
    BadInteger { line: usize, text: String },
    #[error("line {line}: unknown task `{name}`")]
    UnknownTask { line: usize, name: String },
    #[error("line {line}: task is missing required key `{key}`")]
    MissingTaskKey { line: usize, key: String },
    #[error("line {line}: `{name}` is not a declared variable")]
    UnknownVariable { line: usize, name: String },
    #[error("weights cover {got} variable(s) but the x-block has {expected}")]
    WeightArity { expected: usize, got: usize },
    #[error("line {line}: {source}")]
    Polynomial {
        line: usize,
        #[source]
        source: ParseError,
    },
    #[error("{0}")]
    Context(#[from] vfold_core::poly::PolyError),
}

/// Arc description: component texts in declaration order, an optional
/// unknown unit series with its initial value, and the parameter symbol.
#[derive(Debug, Clone)]
pub struct ArcSpec {
    pub name: String,
    pub param: String,
    pub unknown: Option<(String, BigRational)>,
    /// `(variable name, component text, line)` for every declared variable.
    pub components: Vec<(String, String, usize)>,
    pub line: usize,
}

#[derive(Debug, Clone)]
pub enum TaskSpec {
    MuWeighted,
    MuLocal {
        at: Vec<BigRational>,
        cap: Option<usize>,
    },
    MuProfile {
        samples: Vec<BigRational>,
        cap: Option<usize>,
    },
    Section {
        eliminated: String,
        expression: String,
        swap: Option<(String, String)>,
        samples: Vec<BigRational>,
        cap: Option<usize>,
    },
    Whitney {
        arc: String,
    },
    Fold {
        arc: String,
    },
    Transform {
        arc: String,
    },
    Radius {
        at: Vec<BigRational>,
        epsilon: f64,
        budget: Option<usize>,
        seed: Option<u64>,
    },
}

impl TaskSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            TaskSpec::MuWeighted => "mu-weighted",
            TaskSpec::MuLocal { .. } => "mu-local",
            TaskSpec::MuProfile { .. } => "mu-profile",
            TaskSpec::Section { .. } => "section",
            TaskSpec::Whitney { .. } => "whitney",
            TaskSpec::Fold { .. } => "fold",
            TaskSpec::Transform { .. } => "transform",
            TaskSpec::Radius { .. } => "radius",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Task {
    pub spec: TaskSpec,
    pub note: Option<String>,
    pub line: usize,
}

#[derive(Debug)]
pub struct FamilySpec {
    pub x_names: Vec<String>,
    pub t_names: Vec<String>,
    pub context: ContextRef,
    pub family: Polynomial,
    pub family_text: String,
    pub rho: Polynomial,
    pub rho_text: String,
    pub weights: Option<WeightSystem>,
    pub order: u64,
    pub arcs: Vec<ArcSpec>,
    pub tasks: Vec<Task>,
}

impl FamilySpec {
    pub fn arc(&self, name: &str) -> Option<&ArcSpec> {
        self.arcs.iter().find(|a| a.name == name)
    }
}

pub fn parse_rational(text: &str, line: usize) -> Result<BigRational, SpecError> {
    let t = text.trim();
    let err = || SpecError::BadRational {
        line,
        text: t.to_string(),
    };
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1i32, rest.trim()),
        None => (1, t),
    };
    let mut parts = body.splitn(2, '/');
    let num: BigInt = parts.next().unwrap_or("").trim().parse().map_err(|_| err())?;
    let den: BigInt = match parts.next() {
        Some(d) => d.trim().parse().map_err(|_| err())?,
        None => BigInt::from(1),
    };
    if den == BigInt::from(0) {
        return Err(err());
    }
    let q = BigRational::new(num, den);
    Ok(if sign < 0 { -q } else { q })
}

fn parse_rational_list(text: &str, line: usize) -> Result<Vec<BigRational>, SpecError> {
    text.split(',')
        .map(|piece| parse_rational(piece, line))
        .collect()
}

fn parse_usize(text: &str, line: usize) -> Result<usize, SpecError> {
    text.trim().parse().map_err(|_| SpecError::BadInteger {
        line,
        text: text.trim().to_string(),
    })
}

fn parse_u64(text: &str, line: usize) -> Result<u64, SpecError> {
    text.trim().parse().map_err(|_| SpecError::BadInteger {
        line,
        text: text.trim().to_string(),
    })
}

fn parse_f64(text: &str, line: usize) -> Result<f64, SpecError> {
    text.trim().parse().map_err(|_| SpecError::BadRational {
        line,
        text: text.trim().to_string(),
    })
}

fn split_entry(text: &str, line: usize) -> Result<(String, String), SpecError> {
    match text.split_once('=') {
        Some((k, v)) => Ok((k.trim().to_string(), v.trim().to_string())),
        None => Err(SpecError::BadEntry {
            line,
            text: text.to_string(),
        }),
    }
}

#[derive(Default)]
struct FamilyDraft {
    x: Option<(Vec<String>, usize)>,
    t: Option<(Vec<String>, usize)>,
    f_text: Option<(String, usize)>,
    rho_text: Option<(String, usize)>,
    weights: Option<(Vec<u64>, u64)>,
    order: Option<u64>,
}

enum SectionState {
    None,
    Family,
    Arc(usize),
    Tasks,
}

pub fn parse_family_spec(input: &str) -> Result<FamilySpec, SpecError> {
    let mut header_seen = false;
    let mut state = SectionState::None;
    let mut draft = FamilyDraft::default();
    let mut arcs: Vec<ArcSpec> = Vec::new();
    let mut tasks: Vec<Task> = Vec::new();

    for (idx, raw) in input.lines().enumerate() {
        let line = idx + 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        if !header_seen {
            if text == "vfold-spec 1" {
                header_seen = true;
                continue;
            }
            return Err(SpecError::BadHeader { line });
        }
        if let Some(section) = text.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let section = section.trim();
            state = if section == "family" {
                SectionState::Family
            } else if section == "tasks" {
                SectionState::Tasks
            } else if let Some(name) = section.strip_prefix("arc ") {
                let name = name.trim().to_string();
                if arcs.iter().any(|a| a.name == name) {
                    return Err(SpecError::Duplicate {
                        line,
                        what: format!("arc `{name}`"),
                    });
                }
                arcs.push(ArcSpec {
                    name,
                    param: "s".to_string(),
                    unknown: None,
                    components: Vec::new(),
                    line,
                });
                SectionState::Arc(arcs.len() - 1)
            } else {
                return Err(SpecError::UnknownSection {
                    line,
                    name: section.to_string(),
                });
            };
            continue;
        }
        match state {
            SectionState::None => return Err(SpecError::BadHeader { line }),
            SectionState::Family => {
                let (key, value) = split_entry(text, line)?;
                match key.as_str() {
                    "x" => {
                        draft.x = Some((
                            value.split(',').map(|s| s.trim().to_string()).collect(),
                            line,
                        ))
                    }
                    "t" => {
                        let names: Vec<String> = if value.is_empty() {
                            Vec::new()
                        } else {
                            value.split(',').map(|s| s.trim().to_string()).collect()
                        };
                        draft.t = Some((names, line));
                    }
                    "F" => draft.f_text = Some((value, line)),
                    "rho" => draft.rho_text = Some((value, line)),
                    "weights" => {
                        let (ws, d) = value.split_once(';').ok_or_else(|| SpecError::BadEntry {
                            line,
                            text: value.clone(),
                        })?;
                        let weights: Vec<u64> = ws
                            .split(',')
                            .map(|w| parse_u64(w, line))
                            .collect::<Result<_, _>>()?;
                        draft.weights = Some((weights, parse_u64(d, line)?));
                    }
                    "order" => draft.order = Some(parse_u64(&value, line)?),
                    other => {
                        return Err(SpecError::UnknownKey {
                            line,
                            key: other.to_string(),
                        })
                    }
                }
            }
            SectionState::Arc(i) => {
                let (key, value) = split_entry(text, line)?;
                match key.as_str() {
                    "param" => arcs[i].param = value,
                    "unknown" => {
                        let (name, initial) =
                            value.split_once(':').ok_or_else(|| SpecError::BadEntry {
                                line,
                                text: value.clone(),
                            })?;
                        arcs[i].unknown =
                            Some((name.trim().to_string(), parse_rational(initial, line)?));
                    }
                    var => {
                        if arcs[i].components.iter().any(|(v, _, _)| v == var) {
                            return Err(SpecError::Duplicate {
                                line,
                                what: format!("component `{var}`"),
                            });
                        }
                        arcs[i]
                            .components
                            .push((var.to_string(), value, line));
                    }
                }
            }
            SectionState::Tasks => {
                let (head, rest) = match text.split_once(' ') {
                    Some((h, r)) => (h.trim(), r.trim()),
                    None => (text, ""),
                };
                let mut pairs: Vec<(String, String)> = Vec::new();
                let mut note = None;
                if !rest.is_empty() {
                    let mut pieces = rest.split(';');
                    while let Some(piece) = pieces.next() {
                        let (k, v) = split_entry(piece, line)?;
                        if k == "note" {
                            // a note runs to the end of the line, semicolons
                            // included
                            let mut text = v;
                            for tail in pieces.by_ref() {
                                text.push(';');
                                text.push_str(tail);
                            }
                            note = Some(text);
                            break;
                        }
                        pairs.push((k, v));
                    }
                }
                let get = |key: &str| -> Option<&String> {
                    pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v)
                };
                let require = |key: &str| -> Result<&String, SpecError> {
                    get(key).ok_or_else(|| SpecError::MissingTaskKey {
                        line,
                        key: key.to_string(),
                    })
                };
                let spec = match head {
                    "mu-weighted" => TaskSpec::MuWeighted,
                    "mu-local" => TaskSpec::MuLocal {
                        at: match get("at") {
                            Some(v) => parse_rational_list(v, line)?,
                            None => Vec::new(),
                        },
                        cap: get("cap").map(|v| parse_usize(v, line)).transpose()?,
                    },
                    "mu-profile" => TaskSpec::MuProfile {
                        samples: parse_rational_list(require("samples")?, line)?,
                        cap: get("cap").map(|v| parse_usize(v, line)).transpose()?,
                    },
                    "section" => {
                        let (eliminated, expression) = pairs
                            .iter()
                            .find(|(k, _)| !matches!(k.as_str(), "swap" | "samples" | "cap"))
                            .map(|(k, v)| (k.clone(), v.clone()))
                            .ok_or_else(|| SpecError::MissingTaskKey {
                                line,
                                key: "<variable> = <expression>".to_string(),
                            })?;
                        let swap = match get("swap") {
                            Some(v) => {
                                let mut it = v.split_whitespace();
                                match (it.next(), it.next(), it.next()) {
                                    (Some(a), Some(b), None) => {
                                        Some((a.to_string(), b.to_string()))
                                    }
                                    _ => {
                                        return Err(SpecError::BadEntry {
                                            line,
                                            text: v.clone(),
                                        })
                                    }
                                }
                            }
                            None => None,
                        };
                        TaskSpec::Section {
                            eliminated,
                            expression,
                            swap,
                            samples: parse_rational_list(require("samples")?, line)?,
                            cap: get("cap").map(|v| parse_usize(v, line)).transpose()?,
                        }
                    }
                    "whitney" => TaskSpec::Whitney {
                        arc: require("arc")?.clone(),
                    },
                    "fold" => TaskSpec::Fold {
                        arc: require("arc")?.clone(),
                    },
                    "transform" => TaskSpec::Transform {
                        arc: require("arc")?.clone(),
                    },
                    "radius" => TaskSpec::Radius {
                        at: match get("at") {
                            Some(v) => parse_rational_list(v, line)?,
                            None => Vec::new(),
                        },
                        epsilon: parse_f64(require("epsilon")?, line)?,
                        budget: get("budget").map(|v| parse_usize(v, line)).transpose()?,
                        seed: get("seed").map(|v| parse_u64(v, line)).transpose()?,
                    },
                    other => {
                        return Err(SpecError::UnknownTask {
                            line,
                            name: other.to_string(),
                        })
                    }
                };
                tasks.push(Task { spec, note, line });
            }
        }
    }

    if !header_seen {
        return Err(SpecError::BadHeader { line: 1 });
    }
    let (x_names, _) = draft.x.ok_or(SpecError::MissingFamily)?;
    let (t_names, _) = draft.t.unwrap_or((Vec::new(), 0));
    let (f_text, f_line) = draft.f_text.ok_or(SpecError::MissingFamily)?;
    let context = Context::new(x_names.clone(), t_names.clone())?;
    let family = parse_polynomial(&f_text, &context).map_err(|source| SpecError::Polynomial {
        line: f_line,
        source,
    })?;
    let (rho, rho_text) = match draft.rho_text {
        Some((text, line)) => {
            let rho =
                parse_polynomial(&text, &context).map_err(|source| SpecError::Polynomial {
                    line,
                    source,
                })?;
            (rho, text)
        }
        None => {
            // default control function: the sum of x-squares, which is
            // positive definite by construction
            let mut rho = Polynomial::zero(&context);
            for i in 0..context.x_count() {
                let v = Polynomial::variable(&context, i);
                rho = &rho + &(&v * &v);
            }
            let text = vfold_core::text::format_polynomial(&rho);
            (rho, text)
        }
    };
    let weights = match draft.weights {
        Some((w, d)) => {
            if w.len() != x_names.len() {
                return Err(SpecError::WeightArity {
                    expected: x_names.len(),
                    got: w.len(),
                });
            }
            Some(WeightSystem::new(w, d)?)
        }
        None => None,
    };

    // every arc must cover every declared variable with a component
    for arc in &arcs {
        for name in x_names.iter().chain(t_names.iter()) {
            if !arc.components.iter().any(|(v, _, _)| v == name) {
                return Err(SpecError::MissingArcComponent {
                    line: arc.line,
                    arc: arc.name.clone(),
                    var: name.clone(),
                });
            }
        }
        for (v, _, line) in &arc.components {
            if context.index_of(v).is_none() {
                return Err(SpecError::UnknownVariable {
                    line: *line,
                    name: v.clone(),
                });
            }
        }
    }

    Ok(FamilySpec {
        x_names,
        t_names,
        context,
        family,
        family_text: f_text,
        rho,
        rho_text,
        weights,
        order: draft.order.unwrap_or(64),
        arcs,
        tasks,
    })
}
