use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{batakis_domain, koch_snowflake, BallDomain, BatakisParams, BatakisSpec, CantorComplement, CantorSpec};
use super::{HalfSpace, LipschitzGraphDomain, PolygonDomain, Slab};
use crate::error::{invalid, Result};
use crate::harmonic::{Domain, WosConfig};

/// Serializable description that fully determines a test domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainSpec {
    Cantor {
        j: usize,
    },
    Batakis {
        params: BatakisParams,
        base_seed: u64,
        /// Classification recorded when the domain was generated; a rebuild
        /// must reproduce it exactly.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        record: Option<BatakisSpec>,
    },
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
    Graph {
        vertices: Vec<[f64; 2]>,
    },
    Snowflake {
        iter: usize,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    HalfSpace {
        dim: usize,
        window: f64,
    },
    Slab {
        width: f64,
        window: f64,
    },
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| invalid(format!("cannot parse {key}={v}")))
}

fn parse_floats(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|s| parse_num(key, s)).collect()
}

/// `x,y;x,y;...`
fn parse_vertices(key: &str, v: &str) -> Result<Vec<[f64; 2]>> {
    v.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| match parse_floats(key, pair)?.as_slice() {
            [x, y] => Ok([*x, *y]),
            _ => Err(invalid(format!("vertex {pair:?} must be x,y"))),
        })
        .collect()
}

/// Splits `key=value` tokens.
pub fn parse_pairs(tokens: &[String]) -> Result<Vec<(String, String)>> {
    tokens
        .iter()
        .map(|t| t.split_once('=').map(|(k, v)| (k.trim().to_string(), v.trim().to_string())).ok_or_else(|| invalid(format!("expected key=value, got {t:?}"))))
        .collect()
}

impl DomainSpec {
    /// Builds a spec from a kind name and `key=value` parameters.
    ///
    /// ```
    /// use corona_tst::domains::DomainSpec;
    /// let s = DomainSpec::from_params("cantor", &[("j".into(), "3".into())]).unwrap();
    /// assert_eq!(s, DomainSpec::Cantor { j: 3 });
    /// ```
    pub fn from_params(kind: &str, params: &[(String, String)]) -> Result<Self> {
        let get = |k: &str| params.iter().rev().find(|(key, _)| key == k).map(|(_, v)| v.as_str());
        let allowed: &[&str] = match kind {
            "cantor" => &["j"],
            "snowflake" => &["iter"],
            "polygon" | "graph" => &["vertices"],
            "ball" | "disk" => &["center", "radius"],
            "half-space" | "half-plane" => &["dim", "window"],
            "slab" => &["width", "window"],
            "batakis" => &["block", "tau", "eta", "max_n", "walkers", "max_walkers", "seed"],
            other => return Err(invalid(format!("unknown domain kind {other:?}"))),
        };
        if let Some((k, _)) = params.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(invalid(format!("parameter {k:?} does not apply to {kind}")));
        }
        let spec = match kind {
            "cantor" => DomainSpec::Cantor { j: get("j").map_or(Ok(1), |v| parse_num("j", v))? },
            "snowflake" => DomainSpec::Snowflake { iter: get("iter").map_or(Ok(2), |v| parse_num("iter", v))? },
            "polygon" => DomainSpec::Polygon {
                vertices: get("vertices").map_or(Ok(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]), |v| parse_vertices("vertices", v))?,
            },
            "graph" => DomainSpec::Graph {
                vertices: get("vertices").map_or(Ok(vec![[-1.0, 1.0], [0.0, 0.0], [1.0, 1.0]]), |v| parse_vertices("vertices", v))?,
            },
            "ball" | "disk" => DomainSpec::Ball {
                center: get("center").map_or(Ok(vec![0.0, 0.0]), |v| parse_floats("center", v))?,
                radius: get("radius").map_or(Ok(1.0), |v| parse_num("radius", v))?,
            },
            "half-space" | "half-plane" => DomainSpec::HalfSpace {
                dim: get("dim").map_or(Ok(2), |v| parse_num("dim", v))?,
                window: get("window").map_or(Ok(4.0), |v| parse_num("window", v))?,
            },
            "slab" => DomainSpec::Slab {
                width: get("width").map_or(Ok(1.0), |v| parse_num("width", v))?,
                window: get("window").map_or(Ok(4.0), |v| parse_num("window", v))?,
            },
            _ => {
                let d = BatakisParams::default();
                let params = BatakisParams {
                    block: get("block").map_or(Ok(d.block), |v| parse_num("block", v))?,
                    tau: get("tau").map_or(Ok(d.tau), |v| parse_num("tau", v))?,
                    eta: get("eta").map_or(Ok(d.eta), |v| parse_num("eta", v))?,
                    max_n: get("max_n").map_or(Ok(d.max_n), |v| parse_num("max_n", v))?,
                    walkers: get("walkers").map_or(Ok(d.walkers), |v| parse_num("walkers", v))?,
                    max_walkers: get("max_walkers").map_or(Ok(d.max_walkers), |v| parse_num("max_walkers", v))?,
                };
                DomainSpec::Batakis { params, base_seed: get("seed").map_or(Ok(0), |v| parse_num("seed", v))?, record: None }
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DomainSpec::Cantor { j } => CantorSpec::new(*j).map(|_| ()),
            DomainSpec::Batakis { params, .. } => params.validate(),
            DomainSpec::Ball { center, radius } if center.is_empty() || !(*radius > 0.0) => {
                Err(invalid("ball needs a centre and a positive radius"))
            }
            DomainSpec::HalfSpace { dim, window } if *dim < 2 || !(*window > 0.0) => {
                Err(invalid("half-space needs dim >= 2 and a positive window"))
            }
            DomainSpec::Slab { width, window } if !(*width > 0.0 && *window > 0.0) => {
                Err(invalid("slab needs a positive width and window"))
            }
            _ => Ok(()),
        }
    }

    /// Walk configuration used to classify a Batakis domain.
    fn batakis_config(params: &BatakisParams, base_seed: u64, record: Option<&BatakisSpec>) -> WosConfig {
        let mut cfg = WosConfig::new(params.walkers, base_seed);
        if let Some(r) = record {
            cfg.shell = r.shell;
            cfg.far_field_radius = r.far_field_radius;
        }
        cfg
    }

    /// Constructs the domain. A Batakis domain is reclassified from its
    /// seed; with a recorded classification the two must agree.
    pub fn build(&self) -> Result<Box<dyn Domain>> {
        self.validate()?;
        Ok(match self {
            DomainSpec::Cantor { j } => Box::new(CantorComplement { spec: Arc::new(CantorSpec::new(*j)?) }),
            DomainSpec::Batakis { params, base_seed, record } => {
                let cfg = Self::batakis_config(params, *base_seed, record.as_ref());
                let (domain, spec) = batakis_domain(*params, &cfg)?;
                if let Some(r) = record {
                    if *r != spec {
                        return Err(invalid("recorded Batakis classification differs from the replay"));
                    }
                }
                Box::new(domain)
            }
            DomainSpec::Polygon { vertices } => Box::new(PolygonDomain::new(vertices.clone())?),
            DomainSpec::Graph { vertices } => Box::new(LipschitzGraphDomain::new(vertices.clone())?),
            DomainSpec::Snowflake { iter } => Box::new(koch_snowflake(*iter)?),
            DomainSpec::Ball { center, radius } => Box::new(BallDomain { center: center.clone(), radius: *radius }),
            DomainSpec::HalfSpace { dim, window } => Box::new(HalfSpace { dim: *dim, window: *window }),
            DomainSpec::Slab { width, window } => Box::new(Slab { width: *width, window: *window }),
        })
    }

    /// The spec with generation-time data filled in: a Batakis spec gains
    /// its classification record.
    pub fn generate(&self) -> Result<DomainSpec> {
        match self {
            DomainSpec::Batakis { params, base_seed, .. } => {
                let cfg = Self::batakis_config(params, *base_seed, None);
                let (_, spec) = batakis_domain(*params, &cfg)?;
                Ok(DomainSpec::Batakis { params: *params, base_seed: *base_seed, record: Some(spec) })
            }
            other => {
                other.build()?;
                Ok(other.clone())
            }
        }
    }

    pub fn is_cantor(&self) -> Option<usize> {
        match self {
            DomainSpec::Cantor { j } => Some(*j),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(s: &[(&str, &str)]) -> Vec<(String, String)> {
        s.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn built_domains_report_their_own_spec() {
        let specs = [
            DomainSpec::from_params("cantor", &pairs(&[("j", "2")])).unwrap(),
            DomainSpec::from_params("snowflake", &pairs(&[("iter", "1")])).unwrap(),
            DomainSpec::from_params("polygon", &pairs(&[("vertices", "0,0;2,0;0,2")])).unwrap(),
            DomainSpec::from_params("graph", &[]).unwrap(),
            DomainSpec::from_params("disk", &[]).unwrap(),
            DomainSpec::from_params("half-plane", &pairs(&[("window", "3")])).unwrap(),
            DomainSpec::from_params("slab", &pairs(&[("width", "0.5")])).unwrap(),
        ];
        for s in specs {
            let reported: DomainSpec = serde_json::from_value(s.build().unwrap().spec()).unwrap();
            assert_eq!(reported, s);
        }
    }

    #[test]
    fn rejects_foreign_parameters_and_bad_values() {
        assert!(DomainSpec::from_params("cantor", &pairs(&[("iter", "2")])).is_err());
        assert!(DomainSpec::from_params("cantor", &pairs(&[("j", "x")])).is_err());
        assert!(DomainSpec::from_params("polygon", &pairs(&[("vertices", "0,0;1")])).is_err());
        assert!(DomainSpec::from_params("torus", &[]).is_err());
        assert!(parse_pairs(&["j3".to_string()]).is_err());
    }

    #[test]
    fn batakis_record_round_trips() {
        let spec = DomainSpec::from_params(
            "batakis",
            &pairs(&[("block", "1"), ("tau", "0.05"), ("walkers", "2000"), ("max_walkers", "2000"), ("seed", "5")]),
        )
        .unwrap();
        let generated = match spec.generate() {
            Ok(g) => g,
            Err(crate::Error::IndeterminateClassification { .. }) => return,
            Err(e) => panic!("{e}"),
        };
        let text = serde_json::to_string(&generated).unwrap();
        let back: DomainSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, generated);
        back.build().unwrap();
    }
}
