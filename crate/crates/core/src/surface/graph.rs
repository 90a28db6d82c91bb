use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::continuation::{model_preimages, monodromy, sheet_element};
use crate::error::{Error, Result};
use crate::io::FORMAT_VERSION;
use crate::scalar::{to_pair, Cplx, Scalar};
use crate::surface::series::ModelSolution;

/// Largest depth `build_surface` accepts (64 sheets).
pub const DEPTH_CAP: usize = 6;

/// A sheet: its binary label and its level values at `w = 0`
/// (`germ[0]` is the sheet's own value there).
#[derive(Clone, Debug, PartialEq)]
pub struct Sheet<T: Scalar> {
    pub label: String,
    pub germ: Vec<Cplx<T>>,
}

impl<T: Scalar> Sheet<T> {
    /// Ladder step at which the sheet appears (the label length).
    pub fn birth(&self) -> usize {
        self.label.len()
    }
}

/// Monodromy around ladder point `n` exchanges sheets `a` and `b`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub n: usize,
    pub a: String,
    pub b: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceGraph<T: Scalar> {
    pub depth: usize,
    pub lambda: Cplx<T>,
    pub g1: Cplx<T>,
    pub r_hat: T,
    pub ladder: Vec<Cplx<T>>,
    pub sheets: Vec<Sheet<T>>,
    pub edges: Vec<Edge>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SurfaceJson {
    pub format_version: u32,
    pub lambda: f64,
    pub g1: [f64; 2],
    pub r_hat: f64,
    pub depth: usize,
    pub ladder: Vec<f64>,
    pub sheets: Vec<String>,
    pub edges: Vec<Edge>,
}

impl<T: Scalar> SurfaceGraph<T> {
    pub fn sheet(&self, label: &str) -> Option<&Sheet<T>> {
        self.sheets.iter().find(|s| s.label == label)
    }

    pub fn germ(&self, label: &str) -> Result<&[Cplx<T>]> {
        self.sheet(label)
            .map(|s| s.germ.as_slice())
            .ok_or_else(|| Error::Invalid(format!("no sheet {label}")))
    }

    pub fn edges_at(&self, n: usize) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.n == n)
    }

    /// Sheets violating "one partner at every index from birth − 1 on,
    /// none before".
    pub fn degree_law_violations(&self) -> Vec<(usize, String)> {
        let mut bad = Vec::new();
        for n in 0..self.depth {
            for s in &self.sheets {
                let count = self
                    .edges_at(n)
                    .filter(|e| e.a == s.label || e.b == s.label)
                    .count();
                let expected = usize::from(n + 1 >= s.birth());
                if count != expected {
                    bad.push((n, s.label.clone()));
                }
            }
        }
        bad
    }

    pub fn to_json(&self) -> SurfaceJson {
        SurfaceJson {
            format_version: FORMAT_VERSION,
            lambda: self.lambda.re.f64(),
            g1: {
                let (a, b) = to_pair(self.g1);
                [a, b]
            },
            r_hat: self.r_hat.f64(),
            depth: self.depth,
            ladder: self.ladder.iter().map(|w| w.norm().f64()).collect(),
            sheets: self.sheets.iter().map(|s| s.label.clone()).collect(),
            edges: self.edges.clone(),
        }
    }
}

/// Germs of every sheet up to `depth`, with the birth step of each; the
/// children of a sheet are the two preimages of its value at 0.
pub fn sheet_germs<T: Scalar>(lambda: Cplx<T>, depth: usize) -> Vec<(usize, Vec<Cplx<T>>)> {
    let mut out: Vec<(usize, Vec<Cplx<T>>)> = vec![(1, vec![]), (1, vec![-lambda])];
    for m in 2..=depth {
        let parents: Vec<Vec<Cplx<T>>> = out
            .iter()
            .filter(|(b, g)| *b == m - 1 && !g.is_empty())
            .map(|(_, g)| g.clone())
            .collect();
        for g in parents {
            for c in model_preimages(lambda, g[0]) {
                let mut child = vec![c];
                child.extend_from_slice(&g);
                out.push((m, child));
            }
        }
    }
    out
}

/// Options for [`build_surface`].
#[derive(Clone, Copy, Debug)]
pub struct SurfaceOptions<T> {
    /// Loop radius as a fraction of the gap to the nearest other ladder point.
    pub radius_factor: T,
    /// Values closer than this are the same sheet.
    pub tol: T,
}

impl<T: Scalar> Default for SurfaceOptions<T> {
    fn default() -> Self {
        SurfaceOptions {
            radius_factor: T::of(0.3),
            tol: T::of(1e-6),
        }
    }
}

/// Partner of every germ under one loop around `w_n`, or `None` when the
/// loop returns to the start value.
pub fn pairing_at<T: Scalar>(
    ms: &ModelSolution<T>,
    germs: &[Vec<Cplx<T>>],
    n: usize,
    opts: &SurfaceOptions<T>,
) -> Result<Vec<Option<usize>>> {
    let loops: Vec<Result<(Cplx<T>, Cplx<T>)>> = germs
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            monodromy(ms, n, opts.radius_factor, g, 1, opts.tol)
                .map(|r| (r.start_value, r.end_value))
                .map_err(|e| Error::Monodromy {
                    index: n,
                    sheet: format!("#{i}"),
                    source: Box::new(e),
                })
        })
        .collect();
    let loops = loops.into_iter().collect::<Result<Vec<_>>>()?;
    let mut partner = vec![None; germs.len()];
    for (i, (start, end)) in loops.iter().enumerate() {
        let scale = T::one() + start.norm();
        if (*end - *start).norm() <= opts.tol * scale {
            continue;
        }
        let hits: Vec<usize> = (0..germs.len())
            .filter(|&j| (loops[j].0 - *end).norm() <= opts.tol * scale)
            .collect();
        match hits.as_slice() {
            [j] if *j != i => partner[i] = Some(*j),
            _ => {
                return Err(Error::Monodromy {
                    index: n,
                    sheet: format!("#{i}"),
                    source: Box::new(Error::Degenerate(format!(
                        "{} sheets match the loop's end value",
                        hits.len()
                    ))),
                })
            }
        }
    }
    for (i, p) in partner.iter().enumerate() {
        if let Some(j) = *p {
            if partner[j] != Some(i) {
                return Err(Error::Degenerate(format!(
                    "pairing at index {n} is not an involution"
                )));
            }
        }
    }
    Ok(partner)
}

/// Sheets and exchange edges up to ladder index `depth − 1`. Children
/// `C_a, C_b` of a sheet born at step `m` are named by their partners at
/// index `m − 1`: the child whose partner has the lexicographically smaller
/// label gets suffix `0`.
pub fn build_surface<T: Scalar>(
    ms: &ModelSolution<T>,
    depth: usize,
    opts: &SurfaceOptions<T>,
) -> Result<SurfaceGraph<T>> {
    if depth == 0 || depth > DEPTH_CAP {
        return Err(Error::Invalid(format!("depth must lie in 1..={DEPTH_CAP}")));
    }
    let r_hat = ms
        .r_hat
        .ok_or_else(|| Error::Invalid("locate the branch radius first".into()))?;
    let born = sheet_germs(ms.lambda, depth);
    let germs: Vec<Vec<Cplx<T>>> = born.iter().map(|(_, g)| g.clone()).collect();
    let pairings: Vec<Vec<Option<usize>>> = (0..depth)
        .map(|n| pairing_at(ms, &germs, n, opts))
        .collect::<Result<_>>()?;

    let mut labels: Vec<Option<String>> = vec![None; germs.len()];
    labels[0] = Some("0".into());
    labels[1] = Some("1".into());
    for m in 2..=depth {
        let parents: Vec<usize> = (0..germs.len())
            .filter(|&i| born[i].0 == m - 1 && !germs[i].is_empty())
            .collect();
        for p in parents {
            let parent = labels[p].clone().expect("parents are named first");
            let kids: Vec<usize> = (0..germs.len())
                .filter(|&i| born[i].0 == m && germs[i][1..] == germs[p][..])
                .collect();
            let key = |i: usize| pairings[m - 1][i].and_then(|j| labels[j].clone());
            let (ka, kb) = (kids[0], kids[1]);
            let (first, second) = match (key(ka), key(kb)) {
                (Some(a), Some(b)) if a <= b => (ka, kb),
                (Some(_), Some(_)) => (kb, ka),
                _ => {
                    return Err(Error::Degenerate(format!(
                        "children of sheet {parent} have no named partner at index {}",
                        m - 1
                    )))
                }
            };
            labels[first] = Some(format!("{parent}0"));
            labels[second] = Some(format!("{parent}1"));
        }
    }
    let labels: Vec<String> = labels
        .into_iter()
        .map(|l| l.expect("every sheet named"))
        .collect();
    let mut edges = Vec::new();
    for (n, pair) in pairings.iter().enumerate() {
        for (i, p) in pair.iter().enumerate() {
            if let Some(j) = *p {
                if labels[i] < labels[j] {
                    edges.push(Edge {
                        n,
                        a: labels[i].clone(),
                        b: labels[j].clone(),
                    });
                }
            }
        }
    }
    edges.sort();
    let mut sheets: Vec<Sheet<T>> = labels
        .iter()
        .zip(germs)
        .map(|(l, germ)| Sheet {
            label: l.clone(),
            germ,
        })
        .collect();
    sheets.sort_by(|a, b| (a.label.len(), &a.label).cmp(&(b.label.len(), &b.label)));
    Ok(SurfaceGraph {
        depth,
        lambda: ms.lambda,
        g1: ms.g1,
        r_hat,
        ladder: ms.ladder(depth)?,
        sheets,
        edges,
    })
}

/// Value of the sheet `label` at `w`, continued radially from 0.
pub fn sheet_value<T: Scalar>(
    ms: &ModelSolution<T>,
    graph: &SurfaceGraph<T>,
    label: &str,
    w: Cplx<T>,
) -> Result<Cplx<T>> {
    Ok(sheet_element(ms, graph.germ(label)?, w)?.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;
    use crate::surface::{find_rhat, model_series, sheet_identity_check};

    fn half() -> ModelSolution<f64> {
        let ms = model_series(cx(0.5, 0.0), cx(-1.0, 0.0), 300).unwrap();
        let r = find_rhat(&ms, 1e-13).unwrap();
        ms.with_rhat(r)
    }

    fn edge(n: usize, a: &str, b: &str) -> Edge {
        Edge {
            n,
            a: a.into(),
            b: b.into(),
        }
    }

    #[test]
    fn depth_one_and_two() {
        let ms = half();
        let g1 = build_surface(&ms, 1, &SurfaceOptions::default()).unwrap();
        assert_eq!(g1.sheets.len(), 2);
        assert_eq!(g1.edges, vec![edge(0, "0", "1")]);
        let g2 = build_surface(&ms, 2, &SurfaceOptions::default()).unwrap();
        assert_eq!(g2.to_json().sheets, vec!["0", "1", "10", "11"]);
        assert_eq!(
            g2.edges,
            vec![edge(0, "0", "1"), edge(1, "0", "10"), edge(1, "1", "11")]
        );
        assert!(g2.degree_law_violations().is_empty());
    }

    #[test]
    fn depth_three() {
        let ms = half();
        let g = build_surface(&ms, 3, &SurfaceOptions::default()).unwrap();
        assert_eq!(g.sheets.len(), 8);
        let idx2: Vec<&Edge> = g.edges_at(2).collect();
        assert_eq!(idx2.len(), 4);
        let mut seen: Vec<&str> = idx2
            .iter()
            .flat_map(|e| [e.a.as_str(), e.b.as_str()])
            .collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 8);
        assert!(g.degree_law_violations().is_empty(), "{:?}", g.edges);
        let rep = sheet_identity_check(&ms, &g, 20, 42).unwrap();
        for r in &rep.residuals {
            if r.expected_zero {
                assert!(r.max_residual <= 1e-8, "{r:?}");
            } else {
                assert!(r.max_residual > 1e-3, "{r:?}");
            }
        }
    }
}
