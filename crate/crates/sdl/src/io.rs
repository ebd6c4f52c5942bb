//! File formats: matrices, regions, contours, the domain catalog and SVG
//! polylines, plus atomic multi-file output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use sdl_core::convex::ConvexRegion;
use sdl_core::curve::BoundaryCurve;
use sdl_core::decomposition::Contour;
use sdl_core::gleason::{Certificate, DistanceEstimate, ModelDomain, SHILOV_SAMPLES};
use sdl_core::kspectral::SearchConfig;
use sdl_core::np::{BoundaryGrid, MeasureVector};
use sdl_core::rational::{Pole, RationalFunction};
use sdl_core::{ComplexMatrix, C64};

use crate::error::{Result, SdlError};

/// Complex numbers travel as `[re, im]`.
pub type Pair = [f64; 2];

pub fn pair(z: C64) -> Pair {
    [z.re, z.im]
}

pub fn complex(p: Pair) -> C64 {
    C64::new(p[0], p[1])
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| SdlError::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// `{"dim": n, "entries": [[re, im], ...]}`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub dim: usize,
    pub entries: Vec<Pair>,
}

impl MatrixFile {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        Self {
            dim: m.dim(),
            entries: m.as_slice().iter().map(|&z| pair(z)).collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        if self.entries.len() != self.dim * self.dim {
            return Err(SdlError::Input(format!(
                "matrix declares dim {} but has {} entries",
                self.dim,
                self.entries.len()
            )));
        }
        ComplexMatrix::new(self.dim, self.entries.iter().map(|&p| complex(p)).collect())
            .map_err(|e| SdlError::Input(e.to_string()))
    }
}

pub fn read_matrix(path: &Path) -> Result<ComplexMatrix> {
    read_json::<MatrixFile>(path)?.to_matrix()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionFile {
    pub m: usize,
    pub support: Vec<f64>,
    pub witness: Vec<Pair>,
}

impl RegionFile {
    pub fn from_region(r: &ConvexRegion) -> Self {
        Self {
            m: r.m(),
            support: r.support().to_vec(),
            witness: r.witness().iter().map(|&z| pair(z)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContourSpec {
    pub center: Pair,
    pub radius: f64,
    #[serde(default = "default_contour_nodes")]
    pub nodes: usize,
}

fn default_contour_nodes() -> usize {
    256
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContoursFile {
    pub contours: Vec<ContourSpec>,
}

impl ContoursFile {
    pub fn to_contours(&self) -> Result<Vec<Contour>> {
        self.contours
            .iter()
            .map(|c| Contour::new(complex(c.center), c.radius, c.nodes).map_err(|e| SdlError::Input(e.to_string())))
            .collect()
    }
}

/// `{"kind": ..., "params": ...}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveJson {
    Disc { center: Pair, radius: f64 },
    Ellipse { center: Pair, a: f64, b: f64 },
    SmoothedPolygon { vertices: Vec<Pair>, rounding: f64 },
}

impl CurveJson {
    pub fn from_curve(c: &BoundaryCurve) -> Self {
        match c {
            BoundaryCurve::Disc { center, radius } => Self::Disc {
                center: pair(*center),
                radius: *radius,
            },
            BoundaryCurve::Ellipse { center, a, b } => Self::Ellipse {
                center: pair(*center),
                a: *a,
                b: *b,
            },
            BoundaryCurve::SmoothedPolygon(p) => Self::SmoothedPolygon {
                vertices: p.vertices().iter().map(|&z| pair(z)).collect(),
                rounding: p.rounding(),
            },
        }
    }

    pub fn to_curve(&self) -> Result<BoundaryCurve> {
        match self {
            Self::Disc { center, radius } => BoundaryCurve::disc(complex(*center), *radius),
            Self::Ellipse { center, a, b } => BoundaryCurve::ellipse(complex(*center), *a, *b),
            Self::SmoothedPolygon { vertices, rounding } => {
                BoundaryCurve::smoothed_polygon(vertices.iter().map(|&p| complex(p)).collect(), *rounding)
            }
        }
        .map_err(|e| SdlError::Input(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentJson {
    pub curve: CurveJson,
    pub hole: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartJson {
    pub label: String,
    pub curves: Vec<usize>,
    pub is_gleason_part_interior: bool,
    pub area: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShilovJson {
    #[serde(rename = "M")]
    pub m: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainJson {
    pub id: String,
    pub components: Vec<ComponentJson>,
    pub admissible_poles: Vec<Pair>,
    pub parts: Vec<PartJson>,
    /// Curve indices of each antisymmetry set.
    pub antisymmetry: Vec<Vec<usize>>,
    pub shilov: ShilovJson,
    pub choquet_note: String,
}

impl DomainJson {
    pub fn from_domain(d: &ModelDomain) -> Self {
        let parts: Vec<PartJson> = d
            .parts
            .iter()
            .enumerate()
            .map(|(i, p)| PartJson {
                label: p.label.to_string(),
                curves: d.part_curves(i),
                is_gleason_part_interior: p.is_gleason_part_interior,
                area: p.area,
            })
            .collect();
        Self {
            id: d.id.to_string(),
            components: d
                .curves
                .iter()
                .map(|(c, h)| ComponentJson {
                    curve: CurveJson::from_curve(c),
                    hole: *h,
                })
                .collect(),
            admissible_poles: d.admissible_poles.iter().map(|&z| pair(z)).collect(),
            antisymmetry: parts.iter().map(|p| p.curves.clone()).collect(),
            parts,
            shilov: ShilovJson { m: SHILOV_SAMPLES },
            choquet_note: d.choquet_note.to_string(),
        }
    }
}

/// The shipped domain catalog.
pub fn catalog() -> Vec<DomainJson> {
    ModelDomain::IDS
        .iter()
        .map(|id| DomainJson::from_domain(&ModelDomain::catalog(id).expect("catalog id")))
        .collect()
}

/// `{"num": [[re, im], ...], "poles": [[re, im, mult], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RationalJson {
    pub num: Vec<Pair>,
    pub poles: Vec<[f64; 3]>,
}

impl RationalJson {
    pub fn from_rational(u: &RationalFunction) -> Self {
        Self {
            num: u.numerator().iter().map(|&z| pair(z)).collect(),
            poles: u
                .poles()
                .iter()
                .map(|p| [p.location.re, p.location.im, f64::from(p.multiplicity)])
                .collect(),
        }
    }

    pub fn to_rational(&self) -> Result<RationalFunction> {
        let poles = self
            .poles
            .iter()
            .map(|p| {
                if p[2] < 1.0 || p[2].fract() != 0.0 || p[2] > f64::from(u32::MAX) {
                    return Err(SdlError::Input(format!("pole multiplicity {} is not a positive integer", p[2])));
                }
                Ok(Pole {
                    location: C64::new(p[0], p[1]),
                    multiplicity: p[2] as u32,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        RationalFunction::new(self.num.iter().map(|&p| complex(p)).collect(), poles)
            .map_err(|e| SdlError::Input(e.to_string()))
    }
}

/// `{"degrees", "restarts", "steps", "seed", "extra_poles"}`; missing keys
/// take the library defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfigJson {
    #[serde(default)]
    pub degrees: Option<Vec<usize>>,
    #[serde(default)]
    pub restarts: Option<usize>,
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub extra_poles: Vec<Pair>,
}

impl SearchConfigJson {
    pub fn to_config(&self) -> SearchConfig {
        let d = SearchConfig::default();
        SearchConfig {
            degrees: self.degrees.clone().unwrap_or(d.degrees),
            restarts: self.restarts.unwrap_or(d.restarts),
            steps: self.steps.unwrap_or(d.steps),
            seed: self.seed.unwrap_or(d.seed),
            extra_poles: self.extra_poles.iter().map(|&p| complex(p)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub center: Pair,
    pub scale: f64,
    pub poles: Vec<(Pair, f64)>,
    pub degree: usize,
    pub pole_order: usize,
    pub coeffs: Vec<Pair>,
    pub rational: Option<RationalJson>,
}

impl CertificateJson {
    pub fn from_certificate(c: &Certificate) -> Self {
        let rational = c.to_rational().ok().map(|u| RationalJson::from_rational(&u));
        Self {
            center: pair(c.center),
            scale: c.scale,
            poles: c.poles.iter().map(|&(z, s)| (pair(z), s)).collect(),
            degree: c.degree,
            pole_order: c.pole_order,
            coeffs: c.coeffs.iter().map(|&z| pair(z)).collect(),
            rational,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub domain: String,
    pub x1: Pair,
    pub x2: Pair,
    pub d_hat: f64,
    pub degree: usize,
    pub certificate: CertificateJson,
    pub verification_sup: f64,
}

impl DistanceReport {
    pub fn new(domain: &str, x1: C64, x2: C64, e: &DistanceEstimate) -> Self {
        Self {
            domain: domain.to_string(),
            x1: pair(x1),
            x2: pair(x2),
            d_hat: e.d_hat,
            degree: e.degree,
            certificate: CertificateJson::from_certificate(&e.certificate),
            verification_sup: e.verification_sup,
        }
    }
}

/// Grid export with columns `t, re_z, im_z, re_n, im_n, w, kappa`.
pub fn grid_csv(grid: &BoundaryGrid) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "re_z", "im_z", "re_n", "im_n", "w", "kappa"])?;
    for j in 0..grid.len() {
        let (z, n) = (grid.nodes()[j], grid.normals()[j]);
        w.serialize((grid.params()[j], z.re, z.im, n.re, n.im, grid.weights()[j], grid.curvatures()[j]))?;
    }
    finish_csv(w)
}

/// Measure export with columns `node, re_mu, im_mu`.
pub fn measure_csv(mu: &MeasureVector) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["node", "re_mu", "im_mu"])?;
    for (j, v) in mu.values.iter().enumerate() {
        w.serialize((j, v.re, v.im))?;
    }
    finish_csv(w)
}

pub fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner().map_err(|e| SdlError::Csv(e.into_error().into()))
}

/// Polylines and markers in a fixed viewBox fitted to the content with 5%
/// padding.
#[derive(Clone, Debug, Default)]
pub struct Svg {
    polylines: Vec<(Vec<C64>, bool)>,
    markers: Vec<C64>,
}

impl Svg {
    pub fn polyline(mut self, points: &[C64], closed: bool) -> Self {
        self.polylines.push((points.to_vec(), closed));
        self
    }

    pub fn marker(mut self, z: C64) -> Self {
        self.markers.push(z);
        self
    }

    pub fn render(&self) -> String {
        let all = self.polylines.iter().flat_map(|p| p.0.iter()).chain(&self.markers);
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for z in all {
            x0 = x0.min(z.re);
            x1 = x1.max(z.re);
            y0 = y0.min(z.im);
            y1 = y1.max(z.im);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (-1.0, 1.0, -1.0, 1.0);
        }
        let span = (x1 - x0).max(y1 - y0).max(1e-9);
        let pad = 0.05 * span;
        let (w, h) = ((x1 - x0) + 2.0 * pad, (y1 - y0) + 2.0 * pad);
        // SVG y grows downward
        let mut out = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\">\n",
            fmt(x0 - pad),
            fmt(-y1 - pad),
            fmt(w),
            fmt(h)
        );
        let stroke = fmt(span / 400.0);
        for (pts, closed) in &self.polylines {
            let mut coords: Vec<String> = pts.iter().map(|z| format!("{},{}", fmt(z.re), fmt(-z.im))).collect();
            if *closed {
                if let Some(first) = coords.first().cloned() {
                    coords.push(first);
                }
            }
            out.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"{stroke}\" points=\"{}\"/>\n",
                coords.join(" ")
            ));
        }
        for z in &self.markers {
            out.push_str(&format!(
                "<circle cx=\"{}\" cy=\"{}\" r=\"{}\"/>\n",
                fmt(z.re),
                fmt(-z.im),
                fmt(span / 100.0)
            ));
        }
        out.push_str("</svg>\n");
        out
    }
}

fn fmt(x: f64) -> String {
    let s = format!("{x:.9}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

/// Files staged in memory and written together: nothing is written if any
/// target exists and overwriting was not allowed.
#[derive(Debug, Default)]
pub struct OutputSet {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl OutputSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, path: PathBuf, bytes: impl Into<Vec<u8>>) {
        self.files.push((path, bytes.into()));
    }

    pub fn add_json<T: Serialize>(&mut self, path: PathBuf, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.add(path, text);
        Ok(())
    }

    pub fn paths(&self) -> impl Iterator<Item = &Path> {
        self.files.iter().map(|(p, _)| p.as_path())
    }

    pub fn commit(self, force: bool) -> Result<Vec<PathBuf>> {
        if !force {
            if let Some((p, _)) = self.files.iter().find(|(p, _)| p.exists()) {
                return Err(SdlError::Exists(p.clone()));
            }
        }
        let mut written = Vec::with_capacity(self.files.len());
        for (path, bytes) in self.files {
            write_atomic(&path, &bytes)?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| SdlError::io(&dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| SdlError::io(&dir, e))?;
    tmp.write_all(bytes).map_err(|e| SdlError::io(path, e))?;
    tmp.persist(path).map_err(|e| SdlError::io(path, e.error))?;
    Ok(())
}
