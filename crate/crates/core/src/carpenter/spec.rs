//! Finite descriptions of infinite `[0, 1]` sequences.

use std::fmt;
use std::sync::Arc;

use fasteval::{Compiler, Evaler};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Indices `1..=CERTIFICATE_DENSE` are all checked, then a sparse geometric
/// sample up to `CERTIFICATE_SPARSE_MAX`.
const CERTIFICATE_DENSE: u64 = 2000;
const CERTIFICATE_SPARSE_MAX: u64 = 1 << 24;

/// Lower bound promised for a generator from index `from` on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Certificate {
    /// `g(i) >= p / i`.
    Harmonic {
        p: f64,
        #[serde(default = "one")]
        from: u64,
    },
    /// `g(i) >= p`.
    Constant {
        p: f64,
        #[serde(default = "one")]
        from: u64,
    },
}

fn one() -> u64 {
    1
}

impl Certificate {
    pub fn p(&self) -> f64 {
        match *self {
            Certificate::Harmonic { p, .. } | Certificate::Constant { p, .. } => p,
        }
    }

    pub fn from(&self) -> u64 {
        match *self {
            Certificate::Harmonic { from, .. } | Certificate::Constant { from, .. } => from,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Certificate::Constant { .. })
    }

    fn bound(&self, i: u64) -> f64 {
        match *self {
            Certificate::Harmonic { p, .. } => p / i as f64,
            Certificate::Constant { p, .. } => p,
        }
    }
}

struct Compiled {
    slab: fasteval::Slab,
    instr: fasteval::Instruction,
}

/// A compiled expression `g(i)` in the variable `i`.
#[derive(Clone)]
pub struct Generator {
    source: String,
    compiled: Arc<Compiled>,
}

impl Generator {
    pub fn parse(source: &str) -> Result<Self> {
        let parser = fasteval::Parser::new();
        let mut slab = fasteval::Slab::new();
        let instr = parser
            .parse(source, &mut slab.ps)
            .map_err(|e| Error::InvalidSpec(format!("generator {source:?}: {e}")))?
            .from(&slab.ps)
            .compile(&slab.ps, &mut slab.cs);
        let g = Generator {
            source: source.to_string(),
            compiled: Arc::new(Compiled { slab, instr }),
        };
        g.eval(1)?;
        Ok(g)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, i: u64) -> Result<f64> {
        let x = i as f64;
        let mut ns = |name: &str, _args: Vec<f64>| (name == "i").then_some(x);
        let v = self
            .compiled
            .instr
            .eval(&self.compiled.slab, &mut ns)
            .map_err(|e| Error::InvalidSpec(format!("generator {:?} at i={i}: {e}", self.source)))?;
        if !v.is_finite() {
            return Err(Error::InvalidSpec(format!("generator {:?} is not finite at i={i}", self.source)));
        }
        Ok(v)
    }

    /// Checks `g(i)` in `[0, 1/2]` and the certificate on sampled indices.
    fn certify(&self, cert: &Certificate) -> Result<()> {
        let p = cert.p();
        if !(p.is_finite() && p > 0.0) || cert.from() == 0 {
            return Err(Error::InvalidSpec(format!("bad certificate {cert:?}")));
        }
        if cert.is_constant() && p > 0.5 {
            return Err(Error::InvalidSpec(format!("constant certificate {p} exceeds 1/2")));
        }
        let dense = 1..=CERTIFICATE_DENSE;
        let sparse = std::iter::successors(Some(CERTIFICATE_DENSE * 2), |i| {
            (*i < CERTIFICATE_SPARSE_MAX).then_some(i * 2)
        });
        for i in dense.chain(sparse) {
            let v = self.eval(i)?;
            if !(0.0..=0.5).contains(&v) {
                return Err(Error::InvalidSpec(format!(
                    "generator {:?} gives {v} at i={i}, outside [0, 1/2]",
                    self.source
                )));
            }
            if i >= cert.from() && v < cert.bound(i) {
                return Err(Error::Uncertified(format!(
                    "generator {:?} gives {v} < {} at i={i}",
                    self.source,
                    cert.bound(i)
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Generator").field(&self.source).finish()
    }
}

impl PartialEq for Generator {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
    }
}

/// Terms after the prefix. The tail index `i` starts at 1.
#[derive(Debug, Clone, PartialEq)]
pub enum TailRule {
    Zero,
    One,
    /// `c r^i`.
    GeometricLow { c: f64, r: f64 },
    /// `1 - c r^i`.
    GeometricHigh { c: f64, r: f64 },
    /// Odd tail positions from the first rule, even ones from the second.
    Interleave(Box<TailRule>, Box<TailRule>),
    /// `g(i)`, with `g` in `[0, 1/2]` and divergent sum.
    DivergentLow { generator: Generator, certificate: Certificate },
    /// `1 - g(i)`, with `g` as for `DivergentLow`.
    DivergentHigh { generator: Generator, certificate: Certificate },
}

pub(crate) fn geometric(c: f64, r: f64, i: u64) -> f64 {
    match i32::try_from(i) {
        Ok(e) => c * r.powi(e),
        Err(_) => c * r.powf(i as f64),
    }
}

impl TailRule {
    pub fn interleave(a: TailRule, b: TailRule) -> Self {
        TailRule::Interleave(Box::new(a), Box::new(b))
    }

    fn validate(&self) -> Result<()> {
        match self {
            TailRule::Zero | TailRule::One => Ok(()),
            TailRule::GeometricLow { c, r } | TailRule::GeometricHigh { c, r } => {
                if !(c.is_finite() && r.is_finite() && *c >= 0.0 && *r > 0.0 && *r < 1.0 && c * r <= 1.0) {
                    return Err(Error::InvalidSpec(format!(
                        "geometric tail needs c >= 0, 0 < r < 1, c r <= 1 (got c={c}, r={r})"
                    )));
                }
                Ok(())
            }
            TailRule::Interleave(a, b) => {
                a.validate()?;
                b.validate()
            }
            TailRule::DivergentLow { generator, certificate } | TailRule::DivergentHigh { generator, certificate } => {
                generator.certify(certificate)
            }
        }
    }

    /// Tail term `i >= 1`.
    pub fn term(&self, i: u64) -> Result<f64> {
        if i == 0 {
            return Err(Error::InvalidParameter("tail index starts at 1".into()));
        }
        Ok(match self {
            TailRule::Zero => 0.0,
            TailRule::One => 1.0,
            TailRule::GeometricLow { c, r } => geometric(*c, *r, i),
            TailRule::GeometricHigh { c, r } => 1.0 - geometric(*c, *r, i),
            TailRule::Interleave(a, b) => {
                if i % 2 == 1 {
                    a.term(i.div_ceil(2))?
                } else {
                    b.term(i / 2)?
                }
            }
            TailRule::DivergentLow { generator, .. } => generator.eval(i)?,
            TailRule::DivergentHigh { generator, .. } => 1.0 - generator.eval(i)?,
        })
    }

    /// Term-wise `1 - t`.
    pub fn complement(&self) -> Self {
        match self {
            TailRule::Zero => TailRule::One,
            TailRule::One => TailRule::Zero,
            TailRule::GeometricLow { c, r } => TailRule::GeometricHigh { c: *c, r: *r },
            TailRule::GeometricHigh { c, r } => TailRule::GeometricLow { c: *c, r: *r },
            TailRule::Interleave(a, b) => TailRule::interleave(a.complement(), b.complement()),
            TailRule::DivergentLow { generator, certificate } => TailRule::DivergentHigh {
                generator: generator.clone(),
                certificate: *certificate,
            },
            TailRule::DivergentHigh { generator, certificate } => TailRule::DivergentLow {
                generator: generator.clone(),
                certificate: *certificate,
            },
        }
    }

    pub fn has_divergent_low(&self) -> bool {
        match self {
            TailRule::DivergentLow { .. } => true,
            TailRule::Interleave(a, b) => a.has_divergent_low() || b.has_divergent_low(),
            _ => false,
        }
    }

    pub fn has_divergent_high(&self) -> bool {
        match self {
            TailRule::DivergentHigh { .. } => true,
            TailRule::Interleave(a, b) => a.has_divergent_high() || b.has_divergent_high(),
            _ => false,
        }
    }

    pub fn has_divergent(&self) -> bool {
        self.has_divergent_low() || self.has_divergent_high()
    }

    /// Certificate of the first divergent component on the low side.
    pub(crate) fn low_certificate(&self) -> Option<Certificate> {
        match self {
            TailRule::DivergentLow { certificate, .. } => Some(*certificate),
            TailRule::Interleave(a, b) => a.low_certificate().or_else(|| b.low_certificate()),
            _ => None,
        }
    }
}

/// A sequence in `[0, 1]`: explicit prefix, then a tail rule.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSpec {
    prefix: Vec<f64>,
    tail: TailRule,
}

impl SequenceSpec {
    pub fn new(prefix: Vec<f64>, tail: TailRule) -> Result<Self> {
        if let Some(i) = prefix.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidSpec(format!("prefix entry {} = {} outside [0, 1]", i + 1, prefix[i])));
        }
        tail.validate()?;
        Ok(SequenceSpec { prefix, tail })
    }

    /// A finite sequence followed by zeros.
    pub fn finite(values: &[f64]) -> Result<Self> {
        Self::new(values.to_vec(), TailRule::Zero)
    }

    pub fn prefix(&self) -> &[f64] {
        &self.prefix
    }

    pub fn tail(&self) -> &TailRule {
        &self.tail
    }

    /// Term `i >= 1`.
    pub fn term(&self, i: u64) -> Result<f64> {
        if i == 0 {
            return Err(Error::InvalidParameter("sequence index starts at 1".into()));
        }
        let p = self.prefix.len() as u64;
        if i <= p {
            Ok(self.prefix[(i - 1) as usize])
        } else {
            self.tail.term(i - p)
        }
    }

    /// Terms `1..=n`.
    pub fn terms(&self, n: u64) -> Result<Vec<f64>> {
        (1..=n).map(|i| self.term(i)).collect()
    }

    pub fn complement(&self) -> Self {
        SequenceSpec {
            prefix: self.prefix.iter().map(|v| 1.0 - v).collect(),
            tail: self.tail.complement(),
        }
    }

    /// Sum of all terms, when the tail is summable.
    pub fn total(&self) -> Option<f64> {
        fn tail_total(t: &TailRule) -> Option<f64> {
            match t {
                TailRule::Zero => Some(0.0),
                TailRule::GeometricLow { c, r } => Some(c * r / (1.0 - r)),
                TailRule::Interleave(a, b) => Some(tail_total(a)? + tail_total(b)?),
                _ => None,
            }
        }
        Some(self.prefix.iter().sum::<f64>() + tail_total(&self.tail)?)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(SpecFile::from(self)).expect("spec serialises")
    }

    pub fn from_json(value: serde_json::Value) -> Result<Self> {
        let file: SpecFile = serde_json::from_value(value).map_err(|e| Error::Format(e.to_string()))?;
        file.try_into()
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    #[serde(default)]
    prefix: Vec<f64>,
    tail: TailFile,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TailFile {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    parts: Option<Vec<TailFile>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    generator: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: Option<Certificate>,
}

impl TailFile {
    fn bare(kind: &str) -> Self {
        TailFile {
            kind: kind.to_string(),
            c: None,
            r: None,
            parts: None,
            generator: None,
            certificate: None,
        }
    }
}

impl From<&TailRule> for TailFile {
    fn from(t: &TailRule) -> Self {
        match t {
            TailRule::Zero => TailFile::bare("ZeroTail"),
            TailRule::One => TailFile::bare("OneTail"),
            TailRule::GeometricLow { c, r } => TailFile {
                c: Some(*c),
                r: Some(*r),
                ..TailFile::bare("GeometricLow")
            },
            TailRule::GeometricHigh { c, r } => TailFile {
                c: Some(*c),
                r: Some(*r),
                ..TailFile::bare("GeometricHigh")
            },
            TailRule::Interleave(a, b) => TailFile {
                parts: Some(vec![a.as_ref().into(), b.as_ref().into()]),
                ..TailFile::bare("Interleave")
            },
            TailRule::DivergentLow { generator, certificate } => TailFile {
                generator: Some(generator.source().to_string()),
                certificate: Some(*certificate),
                ..TailFile::bare("DivergentLow")
            },
            TailRule::DivergentHigh { generator, certificate } => TailFile {
                generator: Some(generator.source().to_string()),
                certificate: Some(*certificate),
                ..TailFile::bare("DivergentHigh")
            },
        }
    }
}

impl From<&SequenceSpec> for SpecFile {
    fn from(s: &SequenceSpec) -> Self {
        SpecFile {
            prefix: s.prefix.clone(),
            tail: (&s.tail).into(),
        }
    }
}

fn require<T>(v: Option<T>, kind: &str, field: &str) -> Result<T> {
    v.ok_or_else(|| Error::InvalidSpec(format!("{kind} tail needs {field:?}")))
}

impl TryFrom<TailFile> for TailRule {
    type Error = Error;

    fn try_from(f: TailFile) -> Result<Self> {
        let kind = f.kind.as_str();
        Ok(match kind {
            "ZeroTail" => TailRule::Zero,
            "OneTail" => TailRule::One,
            "GeometricLow" => TailRule::GeometricLow {
                c: require(f.c, kind, "c")?,
                r: require(f.r, kind, "r")?,
            },
            "GeometricHigh" => TailRule::GeometricHigh {
                c: require(f.c, kind, "c")?,
                r: require(f.r, kind, "r")?,
            },
            "Interleave" => {
                let parts = require(f.parts, kind, "parts")?;
                let [a, b]: [TailFile; 2] = parts
                    .try_into()
                    .map_err(|_| Error::InvalidSpec("Interleave needs exactly two parts".into()))?;
                TailRule::interleave(a.try_into()?, b.try_into()?)
            }
            "DivergentLow" | "DivergentHigh" => {
                let generator = Generator::parse(&require(f.generator, kind, "generator")?)?;
                let certificate = require(f.certificate, kind, "certificate")?;
                if kind == "DivergentLow" {
                    TailRule::DivergentLow { generator, certificate }
                } else {
                    TailRule::DivergentHigh { generator, certificate }
                }
            }
            other => return Err(Error::InvalidSpec(format!("unknown tail kind {other:?}"))),
        })
    }
}

impl TryFrom<SpecFile> for SequenceSpec {
    type Error = Error;

    fn try_from(f: SpecFile) -> Result<Self> {
        SequenceSpec::new(f.prefix, f.tail.try_into()?)
    }
}
