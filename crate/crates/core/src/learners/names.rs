//! Parsing of learner display names back into specs, e.g.
//! `bag20-nn-h10-it100-e0.001` or `knn-k50-a20-manhattan`.

use std::str::FromStr;

use super::{LearnerSpec, Metric, NetSpec, DEFAULT_MIN_LEAF};
use crate::error::{Error, Result};

fn number<T: FromStr>(part: &str, prefix: &str, name: &str) -> Result<T> {
    part.strip_prefix(prefix)
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::UnknownLearner(name.to_string()))
}

impl FromStr for LearnerSpec {
    type Err = Error;

    fn from_str(name: &str) -> Result<Self> {
        let unknown = || Error::UnknownLearner(name.to_string());
        if name == "mean" {
            return Ok(LearnerSpec::Mean);
        }
        if let Some(rest) = name.strip_prefix("bag") {
            let (bags, base) = rest.split_once('-').ok_or_else(unknown)?;
            let bags: usize = bags.parse().map_err(|_| unknown())?;
            return Ok(LearnerSpec::bagged(bags, base.parse()?));
        }
        let parts: Vec<&str> = name.split('-').collect();
        let spec = match parts.as_slice() {
            ["pls", l] => LearnerSpec::pls(number(l, "l", name)?),
            ["knn", k, a, metric] => LearnerSpec::Knn {
                k: number(k, "k", name)?,
                alpha: number(a, "a", name)?,
                metric: match *metric {
                    "manhattan" => Metric::Manhattan,
                    "euclidean" => Metric::Euclidean,
                    _ => return Err(unknown()),
                },
            },
            ["nn", h, it, e] => LearnerSpec::NeuralNet(NetSpec {
                hidden: number(h, "h", name)?,
                max_iter: number(it, "it", name)?,
                epsilon: number(e, "e", name)?,
            }),
            ["rf", n, extra @ ..] => {
                let mut mtry = None;
                let mut min_leaf = DEFAULT_MIN_LEAF;
                for part in extra {
                    if part.starts_with("leaf") {
                        min_leaf = number(part, "leaf", name)?;
                    } else {
                        mtry = Some(number(part, "m", name)?);
                    }
                }
                LearnerSpec::RandomForest {
                    trees: number(n, "n", name)?,
                    mtry,
                    min_leaf,
                }
            }
            _ => return Err(unknown()),
        };
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_display_names() {
        let specs = [
            LearnerSpec::Mean,
            LearnerSpec::pls(7),
            LearnerSpec::knn(20, 10.0, Metric::Euclidean),
            LearnerSpec::knn(3, 1.5, Metric::Manhattan),
            LearnerSpec::forest(200),
            LearnerSpec::RandomForest { trees: 3, mtry: Some(2), min_leaf: 1 },
            LearnerSpec::net(20, 500, 0.005),
            LearnerSpec::bagged(40, LearnerSpec::net(10, 50, 0.001)),
            LearnerSpec::bagged(3, LearnerSpec::bagged(2, LearnerSpec::pls(1))),
        ];
        for s in specs {
            assert_eq!(s.display_name().parse::<LearnerSpec>().unwrap(), s);
        }
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "median", "pls-3", "knn-k5-a1-chebyshev", "bagx-mean", "nn-h1-it2", "rf-n5-q1"] {
            assert!(bad.parse::<LearnerSpec>().is_err(), "{bad}");
        }
    }
}
