//! Text formats: curve and family JSON, path CSV, projection CSV and SVG.
//!
//! Floats are written with 17 significant digits, which round-trips every
//! finite `f64` exactly.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::contact::{component_name, CurveJet, Domain, HolomorphicCurve};
use crate::error::{Error, Result};
use crate::flows::SampledPath;
use crate::rh::{BoundaryFamily, Sector};
use crate::series::LaurentPoly;

pub const FORMAT_VERSION: &str = "1";

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn raw(x: f64) -> Box<RawValue> {
    RawValue::from_string(fmt_f64(x)).expect("finite float literal")
}

fn ser_f64<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    raw(*x).serialize(s)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub deg: i32,
    #[serde(serialize_with = "ser_f64")]
    pub re: f64,
    #[serde(serialize_with = "ser_f64")]
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DomainSpec {
    Disk {
        #[serde(serialize_with = "ser_f64")]
        radius: f64,
    },
    Annulus {
        #[serde(serialize_with = "ser_f64")]
        inner: f64,
        #[serde(serialize_with = "ser_f64")]
        outer: f64,
    },
}

impl From<Domain> for DomainSpec {
    fn from(d: Domain) -> Self {
        match d {
            Domain::Disk { radius } => Self::Disk { radius },
            Domain::Annulus { inner, outer } => Self::Annulus { inner, outer },
        }
    }
}

impl From<DomainSpec> for Domain {
    fn from(d: DomainSpec) -> Self {
        match d {
            DomainSpec::Disk { radius } => Self::Disk { radius },
            DomainSpec::Annulus { inner, outer } => Self::Annulus { inner, outer },
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<String, f64>,
}

impl Metadata {
    pub fn is_empty(&self) -> bool {
        self.provenance.is_none() && self.tolerances.is_empty()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveIn {
    format_version: String,
    n: usize,
    domain: DomainSpec,
    components: BTreeMap<String, Vec<Coefficient>>,
    #[serde(default)]
    metadata: Metadata,
}

fn coefficients(p: &LaurentPoly) -> Vec<Coefficient> {
    p.terms().map(|(deg, c)| Coefficient { deg, re: c.re, im: c.im }).collect()
}

fn poly_from(name: &str, list: &[Coefficient]) -> Result<LaurentPoly> {
    let mut seen = std::collections::BTreeSet::new();
    for c in list {
        if !seen.insert(c.deg) {
            return Err(Error::InvalidArgument(format!("component {name}: degree {} appears twice", c.deg)));
        }
    }
    LaurentPoly::from_terms(list.iter().map(|c| (c.deg, Complex64::new(c.re, c.im))))
}

/// Serializes the components in slot order `x1, y1, ..., z`.
pub fn curve_to_json(f: &CurveJet, meta: &Metadata) -> String {
    let n = f.n();
    let mut comps = serde_json::Map::new();
    for (k, p) in f.components().iter().enumerate() {
        comps.insert(component_name(n, k), serde_json::to_value(coefficients(p)).expect("serializable"));
    }
    let mut obj = serde_json::Map::new();
    obj.insert("format_version".into(), FORMAT_VERSION.into());
    obj.insert("n".into(), n.into());
    obj.insert("domain".into(), serde_json::to_value(DomainSpec::from(f.domain())).expect("serializable"));
    obj.insert("components".into(), comps.into());
    if !meta.is_empty() {
        obj.insert("metadata".into(), serde_json::to_value(meta).expect("serializable"));
    }
    render(&obj.into(), 0)
}

// Pretty printer that writes numbers as 17-digit scientific literals.
fn render(v: &serde_json::Value, indent: usize) -> String {
    use serde_json::Value;
    let pad = "  ".repeat(indent + 1);
    let end = "  ".repeat(indent);
    match v {
        Value::Number(x) => match x.as_i64() {
            Some(i) => i.to_string(),
            None => fmt_f64(x.as_f64().expect("finite number")),
        },
        Value::Array(items) if items.iter().all(|i| !i.is_object() && !i.is_array()) => {
            format!("[{}]", items.iter().map(|i| render(i, indent)).collect::<Vec<_>>().join(", "))
        }
        Value::Array(items) => {
            let body: Vec<String> = items.iter().map(|i| format!("{pad}{}", render(i, indent + 1))).collect();
            format!("[\n{}\n{end}]", body.join(",\n"))
        }
        Value::Object(map) if map.contains_key("deg") => {
            let body: Vec<String> = map.iter().map(|(k, x)| format!("\"{k}\": {}", render(x, indent))).collect();
            format!("{{{}}}", body.join(", "))
        }
        Value::Object(map) => {
            let body: Vec<String> = map
                .iter()
                .map(|(k, x)| format!("{pad}{}: {}", serde_json::to_string(k).expect("string"), render(x, indent + 1)))
                .collect();
            format!("{{\n{}\n{end}}}", body.join(",\n"))
        }
        other => other.to_string(),
    }
}

pub fn curve_from_json(src: &str) -> Result<(CurveJet, Metadata)> {
    let parsed: CurveIn = serde_json::from_str(src).map_err(|e| Error::InvalidArgument(format!("curve file: {e}")))?;
    if parsed.format_version != FORMAT_VERSION {
        return Err(Error::InvalidArgument(format!("unsupported format_version {:?}", parsed.format_version)));
    }
    let n = parsed.n;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let names: Vec<String> = (0..=2 * n).map(|k| component_name(n, k)).collect();
    if let Some(bad) = parsed.components.keys().find(|k| !names.contains(k)) {
        return Err(Error::InvalidArgument(format!("unknown component name {bad:?}")));
    }
    let mut comps = Vec::with_capacity(2 * n + 1);
    for name in &names {
        let list =
            parsed.components.get(name).ok_or_else(|| Error::InvalidArgument(format!("missing component {name:?}")))?;
        comps.push(poly_from(name, list)?);
    }
    Ok((CurveJet::new(n, comps, parsed.domain.into())?, parsed.metadata))
}

/// Family file: the center comes separately; `a[i][j]` is the coefficient of
/// `v^(j+1)` in `X_(i+1)`, likewise `b` for `Y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyFile {
    pub format_version: String,
    pub n: usize,
    pub a: Vec<Vec<Vec<Coefficient>>>,
    pub b: Vec<Vec<Vec<Coefficient>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sector: Option<[f64; 2]>,
}

pub fn family_from_json(center: &CurveJet, src: &str) -> Result<BoundaryFamily> {
    let file: FamilyFile =
        serde_json::from_str(src).map_err(|e| Error::InvalidArgument(format!("family file: {e}")))?;
    if file.format_version != FORMAT_VERSION {
        return Err(Error::InvalidArgument(format!("unsupported format_version {:?}", file.format_version)));
    }
    if file.n != center.n() {
        return Err(Error::DimensionMismatch { expected: center.n(), found: file.n });
    }
    let convert = |lists: &[Vec<Vec<Coefficient>>], tag: &str| -> Result<Vec<Vec<LaurentPoly>>> {
        lists
            .iter()
            .enumerate()
            .map(|(i, l)| {
                l.iter().enumerate().map(|(j, c)| poly_from(&format!("{tag}[{}][{}]", i + 1, j + 1), c)).collect()
            })
            .collect()
    };
    let fam = BoundaryFamily::from_center(center, convert(&file.a, "a")?, convert(&file.b, "b")?)?;
    Ok(match file.sector {
        Some([theta0, theta1]) => fam.with_sector(Sector { theta0, theta1 }),
        None => fam,
    })
}

pub fn family_to_json(fam: &BoundaryFamily) -> String {
    let n = fam.n();
    let lists = |get: &dyn Fn(usize) -> Vec<Vec<Coefficient>>| (1..=n).map(get).collect::<Vec<_>>();
    let file = FamilyFile {
        format_version: FORMAT_VERSION.into(),
        n,
        a: lists(&|i| fam.a(i)[1..].iter().map(coefficients).collect()),
        b: lists(&|i| fam.b(i)[1..].iter().map(coefficients).collect()),
        sector: fam.sector().map(|s| [s.theta0, s.theta1]),
    };
    render(&serde_json::to_value(&file).expect("serializable"), 0)
}

/// Path CSV: an optional header, then rows `t, re, im, re, im, ...`.
pub fn path_from_csv(src: &str) -> Result<SampledPath> {
    let mut t = Vec::new();
    let mut points = Vec::new();
    for (line_no, line) in src.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        let Ok(vals) = parsed else {
            if t.is_empty() && points.is_empty() {
                continue;
            }
            return Err(Error::InvalidArgument(format!("path csv line {}: not numeric", line_no + 1)));
        };
        if vals.len() < 7 || (vals.len() - 1) % 4 != 2 {
            return Err(Error::InvalidArgument(format!(
                "path csv line {}: expected t and 2(2n+1) columns, got {}",
                line_no + 1,
                vals.len()
            )));
        }
        t.push(vals[0]);
        points.push(vals[1..].chunks(2).map(|c| Complex64::new(c[0], c[1])).collect());
    }
    SampledPath::new(t, points, None)
}

pub fn path_to_csv(path: &SampledPath) -> String {
    let n = path.n();
    let mut out = String::from("t");
    for k in 0..=2 * n {
        let name = component_name(n, k);
        let _ = write!(out, ",{name}_re,{name}_im");
    }
    out.push('\n');
    for (t, p) in path.t().iter().zip(path.points()) {
        out.push_str(&fmt_f64(*t));
        for c in p {
            let _ = write!(out, ",{},{}", fmt_f64(c.re), fmt_f64(c.im));
        }
        out.push('\n');
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Projection {
    /// `(y1, z)`
    Front,
    /// `(x1, y1)`
    Lagrange,
    /// two component slots, 1-based
    Pair(usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    Re,
    Im,
}

impl Projection {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "front" => Ok(Self::Front),
            "lagrange" => Ok(Self::Lagrange),
            _ => {
                let rest = s.strip_prefix("pair").map(|r| r.trim_start_matches([' ', ':', '=']));
                let pair = rest.and_then(|r| {
                    let (i, j) = r.split_once(',')?;
                    Some((i.trim().parse().ok()?, j.trim().parse().ok()?))
                });
                match pair {
                    Some((i, j)) if i >= 1 && j >= 1 => Ok(Self::Pair(i, j)),
                    _ => Err(Error::InvalidArgument(format!("bad projection selector {s:?}"))),
                }
            }
        }
    }

    fn slots(self, n: usize) -> Result<(usize, usize)> {
        let (i, j) = match self {
            Self::Front => (1, 2 * n),
            Self::Lagrange => (0, 1),
            Self::Pair(i, j) => (i - 1, j - 1),
        };
        if i > 2 * n || j > 2 * n {
            return Err(Error::IndexOutOfRange { index: i.max(j) + 1, n: 2 * n + 1 });
        }
        Ok((i, j))
    }
}

impl Part {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "re" => Ok(Self::Re),
            "im" => Ok(Self::Im),
            _ => Err(Error::InvalidArgument(format!("bad part selector {s:?}"))),
        }
    }

    fn take(self, c: Complex64) -> f64 {
        match self {
            Self::Re => c.re,
            Self::Im => c.im,
        }
    }
}

pub const RAYS: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub label: String,
    /// `(t_or_theta, p, q)`
    pub samples: Vec<(f64, f64, f64)>,
}

/// Boundary circles and `RAYS` radial traces of the selected projection.
pub fn projection_traces(
    f: &dyn HolomorphicCurve,
    domain: Domain,
    proj: Projection,
    part: Part,
    samples: usize,
) -> Result<Vec<Trace>> {
    if samples < 2 {
        return Err(Error::InvalidArgument("plot needs at least 2 samples".into()));
    }
    let (i, j) = proj.slots(f.n())?;
    let point = |u: Complex64, s: f64| {
        let p = f.eval(u);
        (s, part.take(p[i]), part.take(p[j]))
    };
    let mut traces = Vec::new();
    for (k, r) in domain.boundary_radii().into_iter().enumerate() {
        let label = if k == 0 { "boundary".to_string() } else { format!("boundary{k}") };
        let pts = (0..=samples)
            .map(|m| {
                let th = 2.0 * PI * m as f64 / samples as f64;
                point(Complex64::from_polar(r, th), th)
            })
            .collect();
        traces.push(Trace { label, samples: pts });
    }
    let (r0, r1) = match domain {
        Domain::Disk { radius } => (0.0, radius),
        Domain::Annulus { inner, outer } => (inner, outer),
    };
    for k in 0..RAYS {
        let th = 2.0 * PI * k as f64 / RAYS as f64;
        let pts = (0..=samples)
            .map(|m| {
                let r = r0 + (r1 - r0) * m as f64 / samples as f64;
                point(Complex64::from_polar(r, th), r)
            })
            .collect();
        traces.push(Trace { label: format!("ray{k}"), samples: pts });
    }
    Ok(traces)
}

pub fn traces_to_csv(traces: &[Trace], names: (&str, &str)) -> String {
    let mut out = format!("t_or_theta,{},{},trace\n", names.0, names.1);
    for tr in traces {
        for (s, p, q) in &tr.samples {
            let _ = writeln!(out, "{},{},{},{}", fmt_f64(*s), fmt_f64(*p), fmt_f64(*q), tr.label);
        }
    }
    out
}

pub fn projection_names(n: usize, proj: Projection, part: Part) -> Result<(String, String)> {
    let (i, j) = proj.slots(n)?;
    let suffix = match part {
        Part::Re => "re",
        Part::Im => "im",
    };
    Ok((format!("{}_{suffix}", component_name(n, i)), format!("{}_{suffix}", component_name(n, j))))
}

/// Standalone SVG with the view box fitted to the data plus a 5% margin.
/// Traces collapsing to a point are drawn as a dot.
pub fn traces_to_svg(traces: &[Trace]) -> String {
    let pts = traces.iter().flat_map(|t| t.samples.iter().map(|&(_, p, q)| (p, -q)));
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 0.0, 0.0, 0.0);
    }
    let span = (x1 - x0).max(y1 - y0);
    let span = if span > 0.0 { span } else { 1.0 };
    let (w, h) = ((x1 - x0).max(span * 1e-3), (y1 - y0).max(span * 1e-3));
    let (mx, my) = (0.05 * w, 0.05 * h);
    let stroke = 0.003 * span;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\">",
        x0 - mx - (w - (x1 - x0)) / 2.0,
        y0 - my - (h - (y1 - y0)) / 2.0,
        w + 2.0 * mx,
        h + 2.0 * my
    );
    for tr in traces {
        let color = if tr.label.starts_with("boundary") { "#1f4e9c" } else { "#b0b0b0" };
        let degenerate = tr.samples.iter().all(|s| (s.1, s.2) == (tr.samples[0].1, tr.samples[0].2));
        if degenerate {
            let (_, p, q) = tr.samples[0];
            let _ = writeln!(out, "  <circle cx=\"{p}\" cy=\"{}\" r=\"{}\" fill=\"{color}\"/>", -q, 4.0 * stroke);
            continue;
        }
        let coords: Vec<String> = tr.samples.iter().map(|&(_, p, q)| format!("{p},{}", -q)).collect();
        let _ = writeln!(
            out,
            "  <polyline id=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"{stroke}\" points=\"{}\"/>",
            tr.label,
            coords.join(" ")
        );
    }
    out.push_str("</svg>\n");
    out
}
