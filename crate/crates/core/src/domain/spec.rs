//! JSON descriptions of domains.

use serde::{Deserialize, Serialize};

use super::{ConvexDomain, Point2, ProjectiveMap};
use crate::error::Result;

fn origin() -> Point2 {
    Point2::ORIGIN
}

fn one() -> f64 {
    1.0
}

/// Serializable domain description, tagged by `"type"`.
///
/// ```
/// use hilbertkit::domain::DomainSpec;
/// let s: DomainSpec = serde_json::from_str(r#"{"type":"pball","p":4,"center":[0,0],"scale":1}"#).unwrap();
/// let d = s.build().unwrap();
/// assert!(d.contains(hilbertkit::Point2::new(0.9, 0.0)));
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum DomainSpec {
    Pball {
        p: f64,
        #[serde(default = "origin")]
        center: Point2,
        #[serde(default = "one")]
        scale: f64,
    },
    Polygon {
        vertices: Vec<Point2>,
    },
    Ellipse {
        #[serde(default = "origin")]
        center: Point2,
        semi_axes: [f64; 2],
        #[serde(default)]
        rotation: f64,
    },
    Disk {
        #[serde(default = "origin")]
        center: Point2,
        #[serde(default = "one")]
        radius: f64,
    },
    Projective {
        matrix: ProjectiveMap,
        inner: Box<DomainSpec>,
    },
    Powercap {
        alpha: f64,
    },
    Smoothpoly {
        sides: usize,
        p: f64,
        #[serde(default = "origin")]
        center: Point2,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        rotation: f64,
    },
}

impl DomainSpec {
    pub fn build(&self) -> Result<ConvexDomain> {
        match self {
            Self::Pball { p, center, scale } => ConvexDomain::pball(*p, *center, *scale),
            Self::Polygon { vertices } => ConvexDomain::polygon(vertices.clone()),
            Self::Ellipse {
                center,
                semi_axes,
                rotation,
            } => ConvexDomain::ellipse(*center, semi_axes[0], semi_axes[1], *rotation),
            Self::Disk { center, radius } => ConvexDomain::disk(*center, *radius),
            Self::Projective { matrix, inner } => inner.build()?.projective_image(matrix),
            Self::Powercap { alpha } => ConvexDomain::power_cap(*alpha),
            Self::Smoothpoly {
                sides,
                p,
                center,
                scale,
                rotation,
            } => ConvexDomain::smooth_polygon(*sides, *p, *center, *scale, *rotation),
        }
    }

    pub(super) fn from_domain(d: &ConvexDomain) -> Self {
        match d {
            ConvexDomain::Ellipse(e) => {
                let (a, b) = e.semi_axes();
                if a == b && e.rotation() == 0.0 {
                    Self::Disk {
                        center: e.center(),
                        radius: a,
                    }
                } else {
                    Self::Ellipse {
                        center: e.center(),
                        semi_axes: [a, b],
                        rotation: e.rotation(),
                    }
                }
            }
            ConvexDomain::PBall(b) => Self::Pball {
                p: b.exponent(),
                center: b.center(),
                scale: b.scale(),
            },
            ConvexDomain::Polygon(g) => Self::Polygon {
                vertices: g.vertices().to_vec(),
            },
            ConvexDomain::PowerCap(c) => Self::Powercap { alpha: c.alpha() },
            ConvexDomain::SmoothPolygon(s) => Self::Smoothpoly {
                sides: s.sides(),
                p: s.exponent(),
                center: s.center(),
                scale: s.scale(),
                rotation: s.rotation(),
            },
            ConvexDomain::Projective(pi) => Self::Projective {
                matrix: *pi.map(),
                inner: Box::new(Self::from_domain(pi.inner())),
            },
        }
    }
}

impl Serialize for ConvexDomain {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_spec().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ConvexDomain {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        DomainSpec::deserialize(d)?
            .build()
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_forms() {
        let specs = [
            r#"{"type":"pball","p":4,"center":[0,0],"scale":1}"#,
            r#"{"type":"polygon","vertices":[[0,0],[1,0],[1,1],[0,1]]}"#,
            r#"{"type":"ellipse","center":[0,0],"semi_axes":[2,1],"rotation":0.3}"#,
            r#"{"type":"disk"}"#,
            r#"{"type":"projective","matrix":[[1,0,0],[0,1,0],[0.2,0,1]],"inner":{"type":"disk"}}"#,
            r#"{"type":"powercap","alpha":2}"#,
            r#"{"type":"smoothpoly","sides":6,"p":8}"#,
        ];
        for s in specs {
            let spec: DomainSpec = serde_json::from_str(s).unwrap();
            let d = spec.build().unwrap();
            let back: ConvexDomain =
                serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
            assert_eq!(back, d, "{s}");
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(serde_json::from_str::<DomainSpec>(r#"{"type":"blob"}"#).is_err());
        let s: DomainSpec = serde_json::from_str(r#"{"type":"pball","p":0.5}"#).unwrap();
        assert!(s.build().is_err());
        let s: DomainSpec = serde_json::from_str(
            r#"{"type":"projective","matrix":[[1,0,0],[0,1,0],[2,0,1]],"inner":{"type":"disk"}}"#,
        )
        .unwrap();
        assert!(s.build().is_err());
    }
}
