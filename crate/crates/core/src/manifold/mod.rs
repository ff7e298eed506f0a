//! Closed-form Riemannian geometry for a fixed family of complete manifolds.
//!
//! Every manifold is represented in an embedding space (unit sphere in R^{n+1},
//! rotation matrices, the hyperboloid in Minkowski space) so that exp, log,
//! distance and parallel transport are available in closed form. Results that are
//! points on the manifold are projected back onto the constraint set.
//!
//! Pairs that are (numerically) in each other's cut locus are rejected rather
//! than resolved by an arbitrary choice of minimizing geodesic.

mod euclidean;
mod geodesic;
mod hyperbolic;
pub mod sampling;
pub mod so3;
mod sphere;
pub mod suite;
mod variation;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DVector, Matrix3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerances::{BASE_MATCH_TOL, CUT_LOCUS_MARGIN, INPUT_CONSTRAINT_TOL};

pub use geodesic::{geodesic_point, GeodesicSegment};
pub use variation::{
    first_variation_residual, first_variation_terms, BumpVariation, EndpointVariation, Variation,
};

/// The built-in manifolds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ManifoldKind {
    /// R^n with the flat metric.
    Euclidean(usize),
    /// Unit sphere S^n in R^{n+1}.
    Sphere(usize),
    /// Rotation group with the bi-invariant metric.
    So3,
    /// Hyperbolic plane, hyperboloid model.
    Hyperbolic2,
}

impl ManifoldKind {
    /// Length of the coordinate vector in the embedding representation.
    pub fn ambient_dim(&self) -> usize {
        match *self {
            ManifoldKind::Euclidean(n) => n,
            ManifoldKind::Sphere(n) => n + 1,
            ManifoldKind::So3 => 9,
            ManifoldKind::Hyperbolic2 => 3,
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            ManifoldKind::Euclidean(n) | ManifoldKind::Sphere(n) => n,
            ManifoldKind::So3 => 3,
            ManifoldKind::Hyperbolic2 => 2,
        }
    }

    /// Distance beyond which log and transport are undefined.
    pub fn injectivity_radius(&self) -> f64 {
        match self {
            ManifoldKind::Sphere(_) | ManifoldKind::So3 => std::f64::consts::PI,
            _ => f64::INFINITY,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            ManifoldKind::Euclidean(0) | ManifoldKind::Sphere(0) => Err(Error::InvalidArgument(
                format!("{self}: dimension must be positive"),
            )),
            _ => Ok(()),
        }
    }

    pub(crate) fn project_point(&self, c: &DVector<f64>) -> DVector<f64> {
        match self {
            ManifoldKind::Euclidean(_) => c.clone(),
            ManifoldKind::Sphere(_) => sphere::project_point(c),
            ManifoldKind::So3 => so3::project_point(c),
            ManifoldKind::Hyperbolic2 => hyperbolic::project_point(c),
        }
    }

    pub(crate) fn project_tangent(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        match self {
            ManifoldKind::Euclidean(_) => v.clone(),
            ManifoldKind::Sphere(_) => sphere::project_tangent(x, v),
            ManifoldKind::So3 => so3::project_tangent(x, v),
            ManifoldKind::Hyperbolic2 => hyperbolic::project_tangent(x, v),
        }
    }

    /// Violation of the manifold constraint by raw coordinates.
    pub fn constraint_residual(&self, c: &[f64]) -> f64 {
        let c = DVector::from_column_slice(c);
        match self {
            ManifoldKind::Euclidean(_) => 0.0,
            ManifoldKind::Sphere(_) => sphere::constraint_residual(&c),
            ManifoldKind::So3 => so3::constraint_residual(&c),
            ManifoldKind::Hyperbolic2 => hyperbolic::constraint_residual(&c),
        }
    }

    fn raw_inner(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        match self {
            ManifoldKind::Euclidean(_) | ManifoldKind::Sphere(_) => u.dot(v),
            ManifoldKind::So3 => 0.5 * u.dot(v),
            ManifoldKind::Hyperbolic2 => hyperbolic::minkowski(u, v),
        }
    }

    fn raw_norm(&self, v: &DVector<f64>) -> f64 {
        self.raw_inner(v, v).max(0.0).sqrt()
    }

    fn raw_exp(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        match self {
            ManifoldKind::Euclidean(_) => euclidean::exp(x, v),
            ManifoldKind::Sphere(_) => sphere::exp(x, v),
            ManifoldKind::So3 => so3::exp(x, v),
            ManifoldKind::Hyperbolic2 => hyperbolic::exp(x, v),
        }
    }

    fn raw_log(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        let out = match self {
            ManifoldKind::Euclidean(_) => Some(euclidean::log(x, y)),
            ManifoldKind::Sphere(_) => sphere::log(x, y, CUT_LOCUS_MARGIN),
            ManifoldKind::So3 => so3::log(x, y, CUT_LOCUS_MARGIN),
            ManifoldKind::Hyperbolic2 => Some(hyperbolic::log(x, y)),
        };
        out.ok_or_else(|| self.cut_locus(x, y))
    }

    fn raw_dist(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        match self {
            ManifoldKind::Euclidean(_) => euclidean::dist(x, y),
            ManifoldKind::Sphere(_) => sphere::angle(x, y),
            ManifoldKind::So3 => so3::dist(x, y),
            ManifoldKind::Hyperbolic2 => hyperbolic::dist(x, y),
        }
    }

    fn raw_transport(
        &self,
        x: &DVector<f64>,
        y: &DVector<f64>,
        v: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        match self {
            ManifoldKind::Euclidean(_) => Ok(v.clone()),
            ManifoldKind::Sphere(_) => {
                if sphere::angle(x, y) > std::f64::consts::PI - CUT_LOCUS_MARGIN {
                    return Err(self.cut_locus(x, y));
                }
                Ok(sphere::transport(x, y, v))
            }
            ManifoldKind::So3 => {
                so3::transport(x, y, v, CUT_LOCUS_MARGIN).ok_or_else(|| self.cut_locus(x, y))
            }
            ManifoldKind::Hyperbolic2 => Ok(hyperbolic::transport(x, y, v)),
        }
    }

    fn raw_log_differential(
        &self,
        x: &DVector<f64>,
        y: &DVector<f64>,
        w: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        match self {
            ManifoldKind::Euclidean(_) => Ok(w.clone()),
            ManifoldKind::So3 => so3::log_differential(x, y, w, CUT_LOCUS_MARGIN)
                .ok_or_else(|| self.cut_locus(x, y)),
            ManifoldKind::Sphere(_) | ManifoldKind::Hyperbolic2 => {
                // Constant curvature: Jacobi fields scale the normal part by sn(r)/r.
                let xi = self.raw_log(x, y)?;
                let back = self.raw_transport(y, x, w)?;
                let r = self.raw_norm(&xi);
                if r < 1e-12 {
                    return Ok(back);
                }
                let u = xi / r;
                let par = &u * self.raw_inner(&u, &back);
                let perp = &back - &par;
                let ratio = match self {
                    ManifoldKind::Sphere(_) => r / r.sin(),
                    _ => r / r.sinh(),
                };
                Ok(self.project_tangent(x, &(par + perp * ratio)))
            }
        }
    }

    fn cut_locus(&self, x: &DVector<f64>, y: &DVector<f64>) -> Error {
        Error::CutLocus {
            x: x.as_slice().to_vec(),
            y: y.as_slice().to_vec(),
            distance: self.raw_dist(x, y),
        }
    }
}

impl fmt::Display for ManifoldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ManifoldKind::Euclidean(n) => write!(f, "euclidean{n}"),
            ManifoldKind::Sphere(n) => write!(f, "sphere{n}"),
            ManifoldKind::So3 => write!(f, "so3"),
            ManifoldKind::Hyperbolic2 => write!(f, "hyperbolic2"),
        }
    }
}

impl FromStr for ManifoldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let parse_dim = |rest: &str| -> Result<usize> {
            rest.parse::<usize>()
                .map_err(|_| Error::InvalidArgument(format!("bad manifold dimension in '{s}'")))
        };
        let kind = match s.as_str() {
            "so3" => ManifoldKind::So3,
            "hyperbolic2" | "hyperbolic" => ManifoldKind::Hyperbolic2,
            _ if s.starts_with("euclidean") => ManifoldKind::Euclidean(parse_dim(&s[9..])?),
            _ if s.starts_with("sphere") => ManifoldKind::Sphere(parse_dim(&s[6..])?),
            _ => return Err(Error::InvalidArgument(format!("unknown manifold '{s}'"))),
        };
        kind.validate()?;
        Ok(kind)
    }
}

impl From<ManifoldKind> for String {
    fn from(k: ManifoldKind) -> String {
        k.to_string()
    }
}

impl TryFrom<String> for ManifoldKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// A point on one of the built-in manifolds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "PointRepr", try_from = "PointRepr")]
pub struct ManifoldPoint {
    kind: ManifoldKind,
    coords: DVector<f64>,
}

#[derive(Serialize, Deserialize)]
struct PointRepr {
    kind: ManifoldKind,
    coords: Vec<f64>,
}

impl From<ManifoldPoint> for PointRepr {
    fn from(p: ManifoldPoint) -> Self {
        PointRepr {
            kind: p.kind,
            coords: p.coords.as_slice().to_vec(),
        }
    }
}

impl TryFrom<PointRepr> for ManifoldPoint {
    type Error = Error;

    fn try_from(r: PointRepr) -> Result<Self> {
        ManifoldPoint::new(r.kind, r.coords)
    }
}

fn check_len(kind: ManifoldKind, len: usize) -> Result<()> {
    if len != kind.ambient_dim() {
        return Err(Error::InvalidPoint {
            kind,
            reason: format!("expected {} coordinates, got {len}", kind.ambient_dim()),
        });
    }
    Ok(())
}

impl ManifoldPoint {
    /// Validates `coords` against the manifold constraint and projects away rounding.
    pub fn new(kind: ManifoldKind, coords: Vec<f64>) -> Result<Self> {
        kind.validate()?;
        check_len(kind, coords.len())?;
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPoint {
                kind,
                reason: "non-finite coordinate".into(),
            });
        }
        let residual = kind.constraint_residual(&coords);
        if residual > INPUT_CONSTRAINT_TOL {
            return Err(Error::InvalidPoint {
                kind,
                reason: format!("constraint residual {residual:.3e}"),
            });
        }
        let coords = DVector::from_vec(coords);
        Ok(ManifoldPoint {
            kind,
            coords: kind.project_point(&coords),
        })
    }

    /// Projects an arbitrary ambient vector onto the manifold.
    pub fn from_ambient(kind: ManifoldKind, coords: Vec<f64>) -> Result<Self> {
        kind.validate()?;
        check_len(kind, coords.len())?;
        let c = DVector::from_vec(coords);
        let ok = match kind {
            ManifoldKind::Sphere(_) => c.norm() > 1e-300,
            ManifoldKind::So3 => so3::to_mat(&c).determinant() > 0.0,
            _ => true,
        };
        if !ok || c.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPoint {
                kind,
                reason: "cannot project onto the manifold".into(),
            });
        }
        Ok(ManifoldPoint {
            kind,
            coords: kind.project_point(&c),
        })
    }

    pub fn from_rotation(r: &Matrix3<f64>) -> Result<Self> {
        ManifoldPoint::new(ManifoldKind::So3, so3::from_mat(r).as_slice().to_vec())
    }

    /// Canonical base point: the origin, north pole `e_n`, the identity, or `(1, 0, 0)`.
    pub fn origin(kind: ManifoldKind) -> Self {
        let n = kind.ambient_dim();
        let mut c = DVector::zeros(n);
        match kind {
            ManifoldKind::Euclidean(_) => {}
            ManifoldKind::Sphere(_) => c[n - 1] = 1.0,
            ManifoldKind::So3 => {
                c[0] = 1.0;
                c[4] = 1.0;
                c[8] = 1.0;
            }
            ManifoldKind::Hyperbolic2 => c[0] = 1.0,
        }
        ManifoldPoint { kind, coords: c }
    }

    pub(crate) fn from_raw(kind: ManifoldKind, coords: DVector<f64>) -> Self {
        ManifoldPoint { kind, coords }
    }

    pub fn kind(&self) -> ManifoldKind {
        self.kind
    }

    pub fn coords(&self) -> &[f64] {
        self.coords.as_slice()
    }

    pub(crate) fn raw(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn constraint_residual(&self) -> f64 {
        self.kind.constraint_residual(self.coords.as_slice())
    }

    pub fn rotation(&self) -> Option<Matrix3<f64>> {
        (self.kind == ManifoldKind::So3).then(|| so3::to_mat(&self.coords))
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }

    /// Coordinate-wise comparison at the base-matching tolerance.
    pub fn approx_eq(&self, other: &ManifoldPoint) -> bool {
        self.kind == other.kind
            && self
                .coords
                .iter()
                .zip(other.coords.iter())
                .all(|(a, b)| (a - b).abs() <= BASE_MATCH_TOL * (1.0 + a.abs()))
    }

    fn same_kind(&self, other: &ManifoldPoint) -> Result<()> {
        if self.kind != other.kind {
            return Err(Error::KindMismatch {
                expected: self.kind,
                found: other.kind,
            });
        }
        Ok(())
    }
}

/// A tangent vector together with its base point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "TangentRepr", try_from = "TangentRepr")]
pub struct TangentVector {
    base: ManifoldPoint,
    components: DVector<f64>,
}

#[derive(Serialize, Deserialize)]
struct TangentRepr {
    kind: ManifoldKind,
    coords: Vec<f64>,
    base: Vec<f64>,
}

impl From<TangentVector> for TangentRepr {
    fn from(v: TangentVector) -> Self {
        TangentRepr {
            kind: v.base.kind,
            coords: v.components.as_slice().to_vec(),
            base: v.base.coords.as_slice().to_vec(),
        }
    }
}

impl TryFrom<TangentRepr> for TangentVector {
    type Error = Error;

    fn try_from(r: TangentRepr) -> Result<Self> {
        let base = ManifoldPoint::new(r.kind, r.base)?;
        TangentVector::new(&base, r.coords)
    }
}

impl TangentVector {
    /// Validates that `components` lie in the tangent space at `base`.
    pub fn new(base: &ManifoldPoint, components: Vec<f64>) -> Result<Self> {
        let kind = base.kind;
        if components.len() != kind.ambient_dim() {
            return Err(Error::InvalidTangent {
                kind,
                reason: format!(
                    "expected {} components, got {}",
                    kind.ambient_dim(),
                    components.len()
                ),
            });
        }
        let v = DVector::from_vec(components);
        if v.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidTangent {
                kind,
                reason: "non-finite component".into(),
            });
        }
        let projected = kind.project_tangent(&base.coords, &v);
        let scale = 1.0 + v.amax();
        let residual = (&projected - &v).amax();
        if residual > INPUT_CONSTRAINT_TOL * scale {
            return Err(Error::InvalidTangent {
                kind,
                reason: format!("normal component {residual:.3e}"),
            });
        }
        Ok(TangentVector {
            base: base.clone(),
            components: projected,
        })
    }

    /// Orthogonal projection of an ambient vector onto the tangent space.
    pub fn from_ambient(base: &ManifoldPoint, components: Vec<f64>) -> Result<Self> {
        if components.len() != base.kind.ambient_dim() {
            return Err(Error::InvalidTangent {
                kind: base.kind,
                reason: "wrong component count".into(),
            });
        }
        let v = DVector::from_vec(components);
        Ok(TangentVector {
            base: base.clone(),
            components: base.kind.project_tangent(&base.coords, &v),
        })
    }

    pub fn zero(base: &ManifoldPoint) -> Self {
        TangentVector {
            base: base.clone(),
            components: DVector::zeros(base.kind.ambient_dim()),
        }
    }

    pub(crate) fn from_raw(base: &ManifoldPoint, components: DVector<f64>) -> Self {
        TangentVector {
            base: base.clone(),
            components,
        }
    }

    pub fn base(&self) -> &ManifoldPoint {
        &self.base
    }

    pub fn kind(&self) -> ManifoldKind {
        self.base.kind
    }

    pub fn components(&self) -> &[f64] {
        self.components.as_slice()
    }

    #[cfg_attr(not(test), allow(dead_code))]
    pub(crate) fn raw(&self) -> &DVector<f64> {
        &self.components
    }

    pub fn norm(&self) -> f64 {
        self.base.kind.raw_norm(&self.components)
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(|c| c.is_finite())
    }

    pub fn scale(&self, a: f64) -> TangentVector {
        TangentVector {
            base: self.base.clone(),
            components: &self.components * a,
        }
    }

    pub fn add(&self, other: &TangentVector) -> Result<TangentVector> {
        check_base(&self.base, other)?;
        Ok(TangentVector {
            base: self.base.clone(),
            components: &self.components + &other.components,
        })
    }

    pub fn sub(&self, other: &TangentVector) -> Result<TangentVector> {
        self.add(&other.scale(-1.0))
    }

    /// Residual of the tangency constraint.
    pub fn tangent_residual(&self) -> f64 {
        let p = self
            .base
            .kind
            .project_tangent(&self.base.coords, &self.components);
        (p - &self.components).amax()
    }
}

fn check_base(x: &ManifoldPoint, v: &TangentVector) -> Result<()> {
    x.same_kind(&v.base)?;
    if !x.approx_eq(&v.base) {
        return Err(Error::BaseMismatch);
    }
    Ok(())
}

/// Riemannian inner product of two tangent vectors at `x`.
pub fn inner(x: &ManifoldPoint, u: &TangentVector, v: &TangentVector) -> Result<f64> {
    check_base(x, u)?;
    check_base(x, v)?;
    Ok(x.kind.raw_inner(&u.components, &v.components))
}

/// Endpoint of the geodesic leaving `x` with velocity `v`.
pub fn exp_map(x: &ManifoldPoint, v: &TangentVector) -> Result<ManifoldPoint> {
    check_base(x, v)?;
    Ok(ManifoldPoint::from_raw(
        x.kind,
        x.kind.raw_exp(&x.coords, &v.components),
    ))
}

/// Initial velocity of the minimizing geodesic from `x` to `y`.
pub fn log_map(x: &ManifoldPoint, y: &ManifoldPoint) -> Result<TangentVector> {
    x.same_kind(y)?;
    let v = x.kind.raw_log(&x.coords, &y.coords)?;
    Ok(TangentVector::from_raw(x, x.kind.project_tangent(&x.coords, &v)))
}

pub fn distance(x: &ManifoldPoint, y: &ManifoldPoint) -> Result<f64> {
    x.same_kind(y)?;
    Ok(x.kind.raw_dist(&x.coords, &y.coords))
}

/// Parallel transport of `v` from `x` to `y` along the minimizing geodesic.
pub fn parallel_transport(
    x: &ManifoldPoint,
    y: &ManifoldPoint,
    v: &TangentVector,
) -> Result<TangentVector> {
    check_base(x, v)?;
    x.same_kind(y)?;
    let out = x.kind.raw_transport(&x.coords, &y.coords, &v.components)?;
    Ok(TangentVector::from_raw(y, out))
}

/// Differential of `log_x` at `y` applied to `w` in `T_y`; the result lies in `T_x`.
///
/// This is the velocity, in normal coordinates centred at `x`, of a curve through
/// `y` with velocity `w`.
pub fn log_differential(
    x: &ManifoldPoint,
    y: &ManifoldPoint,
    w: &TangentVector,
) -> Result<TangentVector> {
    check_base(y, w)?;
    x.same_kind(y)?;
    let out = x
        .kind
        .raw_log_differential(&x.coords, &y.coords, &w.components)?;
    Ok(TangentVector::from_raw(x, out))
}

#[cfg(test)]
mod tests;
