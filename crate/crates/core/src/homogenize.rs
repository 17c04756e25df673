//! Reductions of self-similar systems: disjoint pruning, homogeneous
//! subsystems by path counting, irrationality repair and reflection removal.

use num::bigint::BigUint;
use num::traits::One;
use serde::Serialize;

use crate::boxdim::cylinders_at_scale;
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::ifs::{compose_word, Ifs1d, Ifs2d, Similitude1d, Similitude2d, Word};
use crate::resonance::is_rational_ratio;
use crate::scalar::{ln_bigint, Scalar};

/// A subsystem of word compositions with pairwise disjoint hull images.
#[derive(Debug, Clone, PartialEq)]
pub struct Pruned {
    pub ifs: Ifs1d,
    pub words: Vec<Word>,
    /// Scale-`δ` cylinders scanned.
    pub candidates: usize,
    pub dimension_before: f64,
    pub dimension_after: f64,
}

/// Greedy maximal family of pairwise disjoint scale-`δ` cylinders, scanned
/// by left endpoint.
pub fn prune_to_disjoint(ifs: &Ifs1d, delta: &Scalar, budget: &Budget) -> Result<Pruned> {
    let mut cyl = cylinders_at_scale(ifs, delta, budget)?;
    cyl.sort_by(|a, b| {
        a.interval
            .lo
            .partial_cmp(&b.interval.lo)
            .expect("same backend")
            .then_with(|| a.word.cmp(&b.word))
    });
    let mut kept: Vec<usize> = Vec::new();
    for (i, c) in cyl.iter().enumerate() {
        if kept
            .last()
            .is_none_or(|&k| c.interval.lo > cyl[k].interval.hi)
        {
            kept.push(i);
        }
    }
    if kept.len() < 2 {
        return Err(Error::domain(format!(
            "fewer than two disjoint cylinders at scale {delta}; use a smaller scale"
        )));
    }
    for w in kept.windows(2) {
        assert!(
            cyl[w[1]].interval.lo > cyl[w[0]].interval.hi,
            "pruned cylinders overlap"
        );
    }
    let words: Vec<Word> = kept.iter().map(|&i| cyl[i].word.clone()).collect();
    let maps = words
        .iter()
        .map(|w| compose_word(ifs, w))
        .collect::<Result<Vec<_>>>()?;
    let out = Ifs1d::with_hull(maps, ifs.hull().clone())?;
    Ok(Pruned {
        dimension_before: ifs.similarity_dimension(),
        dimension_after: out.similarity_dimension(),
        candidates: cyl.len(),
        words,
        ifs: out,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomogenizeReport {
    pub k: u64,
    /// `v_i = ⌈k r_i^γ⌉`.
    pub v: Vec<u64>,
    /// `N_k = (Σ v_i)! / ∏ v_i!`, as a decimal string.
    pub n_k: String,
    /// `ρ = ∏ r_i^{v_i}`.
    pub rho: Scalar,
    /// `τ = log N_k / log(1/ρ)`.
    pub tau: f64,
    pub gamma: f64,
}

/// `(Σ v)! / ∏ v_i!` as a product of binomials.
pub fn multinomial(v: &[u64]) -> BigUint {
    let mut acc = BigUint::one();
    let mut total = 0u64;
    for &vi in v {
        for j in 1..=vi {
            total += 1;
            acc = acc * BigUint::from(total) / BigUint::from(j);
        }
    }
    acc
}

/// `⌈x⌉`, treating values within `1e-9` of an integer as that integer.
fn snapped_ceil(x: f64) -> u64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r as u64
    } else {
        x.ceil() as u64
    }
}

fn lattice_point(ratios: &[f64], k: u64) -> Result<(Vec<u64>, f64)> {
    if ratios.len() < 2 {
        return Err(Error::domain(format!(
            "need at least two maps, got {}",
            ratios.len()
        )));
    }
    if k < 1 {
        return Err(Error::domain("walk length k must be at least 1"));
    }
    let gamma = crate::ifs::solve_similarity_dimension(ratios);
    let v = ratios
        .iter()
        .map(|r| snapped_ceil(k as f64 * r.powf(gamma)))
        .collect();
    Ok((v, gamma))
}

/// Words with exactly `v_i` copies of letter `i`, in lexicographic order.
#[derive(Debug, Clone)]
pub struct MultisetWords {
    next: Option<Vec<usize>>,
}

impl MultisetWords {
    pub fn new(v: &[u64]) -> MultisetWords {
        let first: Vec<usize> = v
            .iter()
            .enumerate()
            .flat_map(|(i, &c)| std::iter::repeat_n(i, c as usize))
            .collect();
        MultisetWords { next: Some(first) }
    }
}

impl Iterator for MultisetWords {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let cur = self.next.take()?;
        let mut nxt = cur.clone();
        // Standard next permutation.
        let n = nxt.len();
        let mut i = n;
        while i > 1 && nxt[i - 2] >= nxt[i - 1] {
            i -= 1;
        }
        if i > 1 {
            let p = i - 2;
            let mut j = n - 1;
            while nxt[j] <= nxt[p] {
                j -= 1;
            }
            nxt.swap(p, j);
            nxt[p + 1..].reverse();
            self.next = Some(nxt);
        }
        Some(Word(cur))
    }
}

/// The homogeneous subsystem `{f_u : u has v_i copies of i}`, kept lazy.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousSubsystem {
    pub base: Ifs1d,
    pub v: Vec<u64>,
}

impl HomogeneousSubsystem {
    pub fn words(&self) -> MultisetWords {
        MultisetWords::new(&self.v)
    }

    /// Composes every word; fails when `N_k` exceeds the cell budget.
    pub fn materialize(&self, budget: &Budget) -> Result<Ifs1d> {
        let n = multinomial(&self.v);
        if n > BigUint::from(budget.max_cells) {
            return Err(Error::resource(
                format!("homogeneous subsystem of {n} maps"),
                "max_cells",
                budget.max_cells,
            ));
        }
        let maps = self
            .words()
            .map(|w| compose_word(&self.base, &w))
            .collect::<Result<Vec<Similitude1d>>>()?;
        Ifs1d::with_hull(maps, self.base.hull().clone())
    }
}

/// Homogeneous subsystem of paths with `v_i = ⌈k r_i^γ⌉` steps of type `i`.
pub fn homogeneous_subsystem(
    ifs: &Ifs1d,
    k: u64,
) -> Result<(HomogeneousSubsystem, HomogenizeReport)> {
    let ratios = ifs.ratios();
    if ratios.iter().any(|r| !r.is_positive()) {
        return Err(Error::domain("homogenisation needs positive ratios"));
    }
    let rf: Vec<f64> = ratios.iter().map(Scalar::to_f64).collect();
    let (v, gamma) = lattice_point(&rf, k)?;
    let n = multinomial(&v);
    let mut rho = Scalar::one(ifs.mode());
    for (r, &vi) in ratios.iter().zip(&v) {
        rho = &rho * &r.powi(vi as i32);
    }
    let tau = ln_bigint(&n.clone().into()) / -rho.ln();
    let report = HomogenizeReport {
        k,
        v: v.clone(),
        n_k: n.to_string(),
        rho,
        tau,
        gamma,
    };
    Ok((
        HomogeneousSubsystem {
            base: ifs.clone(),
            v,
        },
        report,
    ))
}

/// Planar version; rotations commute, so every word of the lattice point
/// shares the linear part `ρ R_{Σ v_i θ_i}`.
pub fn homogeneous_subsystem_2d(
    ifs: &Ifs2d,
    k: u64,
    budget: &Budget,
) -> Result<(Ifs2d, HomogenizeReport)> {
    if ifs.maps().iter().any(|m| m.reflect) {
        return Err(Error::domain(
            "remove reflections before homogenising a planar system",
        ));
    }
    let rf: Vec<f64> = ifs.maps().iter().map(|m| m.scale).collect();
    let (v, gamma) = lattice_point(&rf, k)?;
    let n = multinomial(&v);
    if n > BigUint::from(budget.max_cells) {
        return Err(Error::resource(
            format!("planar subsystem of {n} maps"),
            "max_cells",
            budget.max_cells,
        ));
    }
    let maps = MultisetWords::new(&v)
        .map(|w| ifs.compose_word(&w))
        .collect::<Result<Vec<Similitude2d>>>()?;
    let rho: f64 = rf
        .iter()
        .zip(&v)
        .map(|(r, &vi)| r.powi(vi as i32))
        .product();
    let out = Ifs2d::new(maps, ifs.center(), ifs.radius())?;
    let report = HomogenizeReport {
        k,
        v,
        tau: ln_bigint(&n.clone().into()) / -rho.ln(),
        n_k: n.to_string(),
        rho: Scalar::float(rho),
        gamma,
    };
    Ok((out, report))
}

#[derive(Debug, Clone, PartialEq)]
pub enum RepairOutcome {
    /// The common ratios already have no rational log relation up to `q_max`.
    Unchanged(Ifs1d, Ifs1d),
    /// Maps were prefixed by the first map of the original system(s).
    Repaired {
        left: Ifs1d,
        right: Ifs1d,
        prefixed_left: bool,
        prefixed_right: bool,
    },
    /// No prefixing broke the relation.
    Inconclusive(String),
}

fn common_ratio(ifs: &Ifs1d) -> Result<Scalar> {
    ifs.common_ratio()
        .ok_or_else(|| Error::domain("repair needs homogeneous subsystems"))
}

fn prefixed(first: &Similitude1d, hom: &Ifs1d, hull: &crate::ifs::Interval) -> Result<Ifs1d> {
    let maps = hom.maps().iter().map(|g| first.compose(g)).collect();
    Ifs1d::with_hull(maps, hull.clone())
}

/// Makes `log ρ / log ρ'` irrational (up to `q_max`) by prefixing the
/// homogeneous subsystems with the first map of their parent systems.
pub fn repair_irrationality(
    ifs: &Ifs1d,
    ifs2: &Ifs1d,
    hom: &Ifs1d,
    hom2: &Ifs1d,
    q_max: i64,
    tol: f64,
) -> Result<RepairOutcome> {
    let (rho, rho2) = (common_ratio(hom)?.abs(), common_ratio(hom2)?.abs());
    if is_rational_ratio(&rho, &rho2, q_max, tol)?.is_none() {
        return Ok(RepairOutcome::Unchanged(hom.clone(), hom2.clone()));
    }
    let (f1, g1) = (&ifs.maps()[0], &ifs2.maps()[0]);
    for (pl, pr) in [(true, false), (false, true), (true, true)] {
        let a = if pl {
            &rho * &f1.ratio.abs()
        } else {
            rho.clone()
        };
        let b = if pr {
            &rho2 * &g1.ratio.abs()
        } else {
            rho2.clone()
        };
        if is_rational_ratio(&a, &b, q_max, tol)?.is_none() {
            let left = if pl {
                prefixed(f1, hom, hom.hull())?
            } else {
                hom.clone()
            };
            let right = if pr {
                prefixed(g1, hom2, hom2.hull())?
            } else {
                hom2.clone()
            };
            return Ok(RepairOutcome::Repaired {
                left,
                right,
                prefixed_left: pl,
                prefixed_right: pr,
            });
        }
    }
    Ok(RepairOutcome::Inconclusive(format!(
        "ratios {rho} and {rho2} stay log-commensurable after prefixing with {} and {}",
        f1.ratio, g1.ratio
    )))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionFree {
    pub ifs: Ifs2d,
    pub words: Vec<Word>,
    pub dimension_before: f64,
    pub dimension_after: f64,
}

/// All words of length `depth`; those with an odd number of reflections
/// are post-composed with the first reflecting map.
pub fn remove_reflections(ifs: &Ifs2d, depth: usize) -> Result<ReflectionFree> {
    let before = ifs.similarity_dimension();
    let Some(fixer) = ifs.maps().iter().position(|m| m.reflect) else {
        return Ok(ReflectionFree {
            ifs: ifs.clone(),
            words: (0..ifs.len()).map(|i| Word(vec![i])).collect(),
            dimension_before: before,
            dimension_after: before,
        });
    };
    if depth < 1 {
        return Err(Error::domain("depth must be at least 1"));
    }
    let n = ifs.len();
    let total = (n as f64).powi(depth as i32);
    if total > 1e7 {
        return Err(Error::resource(
            format!("{total} words of depth {depth}"),
            "max_cells",
            10_000_000,
        ));
    }
    let mut words = Vec::new();
    let mut maps = Vec::new();
    for idx in 0..total as usize {
        let mut w = vec![0; depth];
        let mut x = idx;
        for slot in w.iter_mut().rev() {
            *slot = x % n;
            x /= n;
        }
        let mut word = Word(w);
        let mut f = ifs.compose_word(&word)?;
        if f.reflect {
            word = word.push(fixer);
            f = f.compose(&ifs.maps()[fixer]);
        }
        debug_assert!(!f.reflect);
        words.push(word);
        maps.push(f);
    }
    let out = Ifs2d::new(maps, ifs.center(), ifs.radius())?;
    Ok(ReflectionFree {
        dimension_after: out.similarity_dimension(),
        dimension_before: before,
        words,
        ifs: out,
    })
}
