//! Prior settings: Hyper-Dirichlet cell masses, the Beta-Bernoulli
//! graph prior and the Gamma prior on the DP concentration.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::chordal::UndirectedGraph;
use crate::{Error, Result};

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be a positive finite number, got {v}")))
    }
}

/// Hyper-Dirichlet prior with total mass `a` spread uniformly over cells:
/// `a^S_{x_S} = a / |𝒳_S|` for every subset `S`, which is hyperconsistent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperDirichletSpec {
    pub a: f64,
}

impl HyperDirichletSpec {
    pub fn new(a: f64) -> Result<Self> {
        check_positive("a", a)?;
        Ok(Self { a })
    }
}

impl Default for HyperDirichletSpec {
    fn default() -> Self {
        Self { a: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphPriorSpec {
    pub a_g: f64,
    pub b_g: f64,
}

impl GraphPriorSpec {
    pub fn new(a_g: f64, b_g: f64) -> Result<Self> {
        check_positive("a_g", a_g)?;
        check_positive("b_g", b_g)?;
        Ok(Self { a_g, b_g })
    }
}

impl Default for GraphPriorSpec {
    fn default() -> Self {
        Self { a_g: 1.0, b_g: 1.0 }
    }
}

/// `α ~ Gamma(c, d)` with shape `c` and rate `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationPriorSpec {
    pub c: f64,
    pub d: f64,
}

impl ConcentrationPriorSpec {
    pub fn new(c: f64, d: f64) -> Result<Self> {
        check_positive("c", c)?;
        check_positive("d", d)?;
        Ok(Self { c, d })
    }

    pub fn mean(&self) -> f64 {
        self.c / self.d
    }
}

impl Default for ConcentrationPriorSpec {
    fn default() -> Self {
        Self { c: 3.0, d: 1.0 }
    }
}

/// `a / Π_{j∈S} l_j`; the empty subset gets the full mass `a`.
pub fn hyperparameter(spec: &HyperDirichletSpec, levels: &[usize], subset: &[usize]) -> f64 {
    spec.a / subset.iter().map(|&j| levels[j] as f64).product::<f64>()
}

/// Log of the Beta-Bernoulli graph prior, which depends on the graph only
/// through its edge count. Unnormalized over the decomposable class.
pub fn log_graph_prior(graph: &UndirectedGraph, spec: &GraphPriorSpec) -> f64 {
    log_graph_prior_by_size(graph.q(), graph.edge_count(), spec)
}

pub fn log_graph_prior_by_size(q: usize, edges: usize, spec: &GraphPriorSpec) -> f64 {
    let pairs = (q * q.saturating_sub(1) / 2) as f64;
    let e = edges as f64;
    let GraphPriorSpec { a_g, b_g } = *spec;
    ln_gamma(a_g + e) + ln_gamma(b_g + pairs - e) - ln_gamma(pairs + a_g + b_g)
        + ln_gamma(a_g + b_g)
        - ln_gamma(a_g)
        - ln_gamma(b_g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hyperparameter_values() {
        let spec = HyperDirichletSpec::default();
        assert_eq!(hyperparameter(&spec, &[2, 2], &[0]), 0.5);
        assert_eq!(hyperparameter(&spec, &[2, 2], &[0, 1]), 0.25);
        assert_eq!(hyperparameter(&spec, &[2, 2], &[]), 1.0);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(HyperDirichletSpec::new(0.0).is_err());
        assert!(GraphPriorSpec::new(1.0, -1.0).is_err());
        assert!(ConcentrationPriorSpec::new(f64::NAN, 1.0).is_err());
    }

    /// Enumerates all configurations of `vars` with the given levels.
    fn configurations(vars: &[usize], levels: &[usize]) -> Vec<Vec<usize>> {
        vars.iter().fold(vec![vec![]], |acc, &j| {
            acc.into_iter()
                .flat_map(|p| {
                    (0..levels[j]).map(move |v| {
                        let mut p = p.clone();
                        p.push(v);
                        p
                    })
                })
                .collect()
        })
    }

    #[test]
    fn hyperconsistency_on_overlapping_subsets() {
        let levels = [2, 3, 2, 3, 2];
        let spec = HyperDirichletSpec::new(1.7).unwrap();
        let subsets: Vec<Vec<usize>> = (1u32..32)
            .filter(|m| m.count_ones() <= 4)
            .map(|m| (0..5).filter(|j| m & (1 << j) != 0).collect())
            .collect();
        for c in &subsets {
            for c2 in &subsets {
                let inter: Vec<usize> = c.iter().copied().filter(|v| c2.contains(v)).collect();
                if inter.is_empty() {
                    continue;
                }
                for x_inter in configurations(&inter, &levels) {
                    let mass = |set: &Vec<usize>| -> f64 {
                        configurations(set, &levels)
                            .into_iter()
                            .filter(|x| {
                                inter.iter().zip(&x_inter).all(|(v, xv)| {
                                    x[set.iter().position(|s| s == v).unwrap()] == *xv
                                })
                            })
                            .map(|_| hyperparameter(&spec, &levels, set))
                            .sum()
                    };
                    assert_relative_eq!(mass(c), mass(c2), max_relative = 1e-12);
                }
            }
        }
    }

    fn graph_with_edges(q: usize, k: usize) -> UndirectedGraph {
        let mut g = UndirectedGraph::empty(q).unwrap();
        let mut added = 0;
        'outer: for u in 0..q {
            for v in u + 1..q {
                if added == k {
                    break 'outer;
                }
                g.add_edge(u, v);
                added += 1;
            }
        }
        g
    }

    #[test]
    fn graph_prior_values() {
        let unif = GraphPriorSpec::default();
        for e in 0..=1 {
            assert_relative_eq!(
                log_graph_prior(&graph_with_edges(2, e), &unif),
                0.5f64.ln(),
                epsilon = 1e-12
            );
        }
        // All 8 labelled graphs on three vertices.
        let total: f64 = (0..8u32)
            .map(|code| {
                let e = code.count_ones() as usize;
                log_graph_prior_by_size(3, e, &unif).exp()
            })
            .sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-12);

        let sparse = GraphPriorSpec::new(1.0, 3.0).unwrap();
        let ratio = (log_graph_prior(&graph_with_edges(3, 0), &sparse)
            - log_graph_prior(&graph_with_edges(3, 3), &sparse))
        .exp();
        assert_relative_eq!(ratio, 10.0, max_relative = 1e-12);
    }

    #[test]
    fn graph_prior_depends_on_size_only_and_favours_sparsity() {
        let sparse = GraphPriorSpec::new(1.0, 3.0).unwrap();
        let a = UndirectedGraph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let b = UndirectedGraph::from_edges(4, &[(0, 3), (1, 2)]).unwrap();
        assert_eq!(log_graph_prior(&a, &sparse), log_graph_prior(&b, &sparse));

        // p(e+1)/p(e) = (a_g+e)/(b_g+45-e-1): decreasing while a_g+e < b_g+44-e,
        // flat between 23 and 24 edges, then rising towards the complete graph.
        let values: Vec<f64> = (0..=45)
            .map(|e| log_graph_prior_by_size(10, e, &sparse))
            .collect();
        assert!(values[..=23].windows(2).all(|w| w[1] < w[0]));
        assert!(values[24..].windows(2).all(|w| w[1] > w[0]));
    }
}
