//! Truncated random-current series for the partition function and the
//! correlations ⟨σ^φ⟩, the per-amplitude Ginibre gap, and the coefficient
//! identity between current-pair sums and two-color multigraph counts.
//!
//! Truncation is by total amplitude: only `N` with `Σ_e N_e ≤ D` enter.
//! Everything here is exact; nothing is divided until a caller asks for a
//! ratio.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};
use rayon::prelude::*;
use serde_json::json;

use crate::current::{amplitudes_up_to, enumerate_currents, CurrentConstraint, EdgeAmplitude};
use crate::error::Result;
use crate::graph::{Graph, SourceFunction};
use crate::multigraph::{count_one_color, count_two_color, CountMethod, OneColorCounts, TwoColorCounts};
use crate::rational::{factorial, format_rational, to_f64};

/// One amplitude class of a truncated series: the integer behind the term
/// and the term's exact contribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub amplitude: EdgeAmplitude,
    pub count: BigInt,
    pub coeff: BigRational,
}

/// Terms indexed by amplitude, all with `Σ N_e ≤ degree_cap`, graded by total.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    pub degree_cap: u32,
    pub terms: Vec<Term>,
}

impl TruncatedSeries {
    pub fn value(&self) -> BigRational {
        self.terms.iter().map(|t| t.coeff.clone()).sum()
    }

    /// Sum over terms with total amplitude at most `cap`.
    pub fn partial(&self, cap: u32) -> BigRational {
        self.terms
            .iter()
            .filter(|t| t.amplitude.total() <= cap)
            .map(|t| t.coeff.clone())
            .sum()
    }

    /// `|S_D − S_{D−1}| / |S_D|`; `None` at `D = 0` or when `S_D = 0`.
    pub fn relative_change(&self) -> Option<f64> {
        if self.degree_cap == 0 {
            return None;
        }
        let last = self.value();
        if last.is_zero() {
            return None;
        }
        let prev = self.partial(self.degree_cap - 1);
        Some(to_f64(&((&last - &prev) / &last).abs()))
    }

    /// `{"D", "value", "per_N": [{"N", "count", "coeff"}]}`, zero terms omitted.
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<_> = self
            .terms
            .iter()
            .filter(|t| !t.count.is_zero())
            .map(|t| {
                json!({
                    "N": t.amplitude,
                    "count": t.count.to_string(),
                    "coeff": format_rational(&t.coeff),
                })
            })
            .collect();
        json!({
            "D": self.degree_cap,
            "value": format_rational(&self.value()),
            "per_N": rows,
        })
    }
}

/// Π_e (J_e/2)^{N_e} / N_e!, the grading shared by every amplitude class.
pub fn amplitude_prefactor(graph: &Graph, amplitude: &EdgeAmplitude) -> BigRational {
    let mut numer = BigInt::one();
    let mut denom = BigInt::one();
    for (half, &k) in graph.half_couplings().iter().zip(amplitude.values()) {
        numer *= Pow::pow(half.numer(), k);
        denom *= Pow::pow(half.denom(), k) * BigInt::from(factorial(k));
    }
    BigRational::new(numer, denom)
}

/// Σ_{∂n = φ, |n| = N} w_J(n) for every `N` with `ΣN ≤ D`; `count` is the
/// number of currents in each class.
pub fn current_series(graph: &Graph, phi: &SourceFunction, degree_cap: u32) -> Result<TruncatedSeries> {
    graph.check_source(phi)?;
    let half = graph.half_couplings();
    let terms = amplitudes_up_to(graph.edge_count(), degree_cap)
        .into_par_iter()
        .map(|amplitude| {
            let mut count = 0u64;
            let mut coeff = BigRational::zero();
            let currents = enumerate_currents(graph, CurrentConstraint::Amplitude(amplitude.clone()), Some(phi.clone()));
            for n in currents {
                count += 1;
                coeff += n.weight_with(&half);
            }
            Term {
                amplitude,
                count: count.into(),
                coeff,
            }
        })
        .collect();
    Ok(TruncatedSeries { degree_cap, terms })
}

/// Truncated Z: Σ_{∂n = 0, Σ|n| ≤ D} w_J(n).
pub fn partition_function(graph: &Graph, degree_cap: u32) -> BigRational {
    current_series(graph, &SourceFunction::zeros(graph.vertex_count()), degree_cap)
        .expect("zero source matches the graph")
        .value()
}

/// Truncated ⟨σ^φ⟩ as a ratio of two truncated current sums.
pub fn correlation(graph: &Graph, phi: &SourceFunction, degree_cap: u32) -> Result<BigRational> {
    Ok(correlation_series(graph, phi, degree_cap)?.ratio())
}

/// Numerator and denominator series of a truncated correlation.
#[derive(Debug, Clone)]
pub struct CorrelationSeries {
    pub numerator: TruncatedSeries,
    pub denominator: TruncatedSeries,
}

impl CorrelationSeries {
    pub fn ratio(&self) -> BigRational {
        let num = self.numerator.value();
        if num.is_zero() {
            return num;
        }
        num / self.denominator.value()
    }

    /// Relative change of the ratio between caps `D − 1` and `D`.
    pub fn relative_change(&self) -> Option<f64> {
        let d = self.numerator.degree_cap;
        if d == 0 {
            return None;
        }
        let at = |cap| {
            let num = self.numerator.partial(cap);
            if num.is_zero() {
                num
            } else {
                num / self.denominator.partial(cap)
            }
        };
        let (last, prev) = (at(d), at(d - 1));
        if last.is_zero() {
            return None;
        }
        Some(to_f64(&((&last - &prev) / &last).abs()))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut out = self.numerator.to_json();
        out["value"] = format_rational(&self.ratio()).into();
        out["value_f64"] = to_f64(&self.ratio()).into();
        out["numerator"] = format_rational(&self.numerator.value()).into();
        out["partition_function"] = format_rational(&self.denominator.value()).into();
        out["relative_change"] = self.relative_change().into();
        out
    }
}

pub fn correlation_series(graph: &Graph, phi: &SourceFunction, degree_cap: u32) -> Result<CorrelationSeries> {
    let zero = SourceFunction::zeros(graph.vertex_count());
    Ok(CorrelationSeries {
        numerator: current_series(graph, phi, degree_cap)?,
        denominator: current_series(graph, &zero, degree_cap)?,
    })
}

/// The counts behind one amplitude class of the Ginibre gap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapCounts {
    pub amplitude: EdgeAmplitude,
    /// #{∂r = φ + ψ, ∂b = 0}_N
    pub sum_pair: BigUint,
    /// #{∂r = φ − ψ, ∂b = 0}_N
    pub difference_pair: BigUint,
    /// #{∂r = φ, ∂b = ψ}_N
    pub mixed_pair: BigUint,
    /// #{∂r = φ + ψ}_N
    pub sum_single: BigUint,
    /// #{∂r = φ − ψ}_N
    pub difference_single: BigUint,
}

impl GapCounts {
    /// `sum_pair + difference_pair − 2 · mixed_pair`.
    pub fn gap(&self) -> BigInt {
        BigInt::from(&self.sum_pair + &self.difference_pair) - BigInt::from(&self.mixed_pair << 1)
    }

    /// `(sum_single − difference_single)^2`.
    pub fn square(&self) -> BigUint {
        let diff = BigInt::from(self.sum_single.clone()) - BigInt::from(self.difference_single.clone());
        diff.magnitude().pow(2u32)
    }

    /// The gap equals the square, hence is nonnegative.
    pub fn holds(&self) -> bool {
        self.gap() == BigInt::from(self.square())
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "N": self.amplitude,
            "sum_pair": self.sum_pair.to_string(),
            "difference_pair": self.difference_pair.to_string(),
            "mixed_pair": self.mixed_pair.to_string(),
            "gap": self.gap().to_string(),
            "sum_single": self.sum_single.to_string(),
            "difference_single": self.difference_single.to_string(),
            "square": self.square().to_string(),
            "ok": self.holds(),
        })
    }
}

/// Two-color counts by the multinomial route, one-color counts by the
/// binomial route; the caller compares `gap()` with `square()`.
pub fn ginibre_gap_counts(
    graph: &Graph,
    amplitude: &EdgeAmplitude,
    phi: &SourceFunction,
    psi: &SourceFunction,
) -> Result<GapCounts> {
    graph.check_source(phi)?;
    graph.check_source(psi)?;
    phi.require_mean_zero("phi")?;
    psi.require_mean_zero("psi")?;
    let zero = SourceFunction::zeros(graph.vertex_count());
    let plus = phi + psi;
    let minus = phi - psi;
    let method = CountMethod::Multinomial;
    Ok(GapCounts {
        amplitude: amplitude.clone(),
        sum_pair: count_two_color(graph, amplitude, &plus, &zero, method)?,
        difference_pair: count_two_color(graph, amplitude, &minus, &zero, method)?,
        mixed_pair: count_two_color(graph, amplitude, phi, psi, method)?,
        sum_single: count_one_color(graph, amplitude, &plus)?,
        difference_single: count_one_color(graph, amplitude, &minus)?,
    })
}

/// All one-color and two-color classes of a single amplitude, for sweeping
/// many `(φ, ψ)` without recounting.
#[derive(Debug, Clone)]
pub struct GapTables {
    amplitude: EdgeAmplitude,
    vertex_count: usize,
    one: OneColorCounts,
    two: TwoColorCounts,
}

impl GapTables {
    pub fn new(graph: &Graph, amplitude: &EdgeAmplitude) -> Result<Self> {
        Ok(GapTables {
            amplitude: amplitude.clone(),
            vertex_count: graph.vertex_count(),
            one: OneColorCounts::tabulate(graph, amplitude)?,
            two: TwoColorCounts::tabulate(graph, amplitude, CountMethod::Multinomial)?,
        })
    }

    /// Same contract as [`ginibre_gap_counts`].
    pub fn gap_counts(&self, phi: &SourceFunction, psi: &SourceFunction) -> Result<GapCounts> {
        phi.require_mean_zero("phi")?;
        psi.require_mean_zero("psi")?;
        let zero = SourceFunction::zeros(self.vertex_count);
        let plus = phi + psi;
        let minus = phi - psi;
        Ok(GapCounts {
            amplitude: self.amplitude.clone(),
            sum_pair: self.two.get(&plus, &zero),
            difference_pair: self.two.get(&minus, &zero),
            mixed_pair: self.two.get(phi, psi),
            sum_single: self.one.get(&plus),
            difference_single: self.one.get(&minus),
        })
    }
}

/// Σ_{ΣN ≤ D} prefactor(N) · gap(N), with the per-amplitude counts kept.
#[derive(Debug, Clone)]
pub struct GapSeries {
    pub series: TruncatedSeries,
    pub counts: Vec<GapCounts>,
}

impl GapSeries {
    pub fn value(&self) -> BigRational {
        self.series.value()
    }

    /// Every gap equals its square and the total is nonnegative.
    pub fn holds(&self) -> bool {
        self.counts.iter().all(GapCounts::holds) && !self.value().is_negative()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut out = self.series.to_json();
        out["nonnegative"] = (!self.value().is_negative()).into();
        out["squares_ok"] = self.counts.iter().all(GapCounts::holds).into();
        out
    }
}

pub fn ginibre_gap_series(
    graph: &Graph,
    phi: &SourceFunction,
    psi: &SourceFunction,
    degree_cap: u32,
) -> Result<GapSeries> {
    graph.check_source(phi)?;
    graph.check_source(psi)?;
    phi.require_mean_zero("phi")?;
    psi.require_mean_zero("psi")?;
    let rows: Vec<(Term, GapCounts)> = amplitudes_up_to(graph.edge_count(), degree_cap)
        .into_par_iter()
        .map(|amplitude| {
            let counts = ginibre_gap_counts(graph, &amplitude, phi, psi)?;
            let gap = counts.gap();
            let coeff = amplitude_prefactor(graph, &amplitude) * BigRational::from(gap.clone());
            Ok((
                Term {
                    amplitude,
                    count: gap,
                    coeff,
                },
                counts,
            ))
        })
        .collect::<Result<_>>()?;
    let (terms, counts) = rows.into_iter().unzip();
    Ok(GapSeries {
        series: TruncatedSeries { degree_cap, terms },
        counts,
    })
}

/// One amplitude of the coefficient identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientRow {
    pub amplitude: EdgeAmplitude,
    /// Σ_{∂n = φ, ∂m = ψ, |n + m| = N} w_J(n) w_J(m)
    pub pair_sum: BigRational,
    /// #{∂r = φ, ∂b = ψ}_N
    pub count: BigUint,
    /// prefactor(N) · count
    pub count_side: BigRational,
}

impl CoefficientRow {
    pub fn matches(&self) -> bool {
        self.pair_sum == self.count_side
    }
}

#[derive(Debug, Clone)]
pub struct CoefficientReport {
    pub degree_cap: u32,
    pub rows: Vec<CoefficientRow>,
}

impl CoefficientReport {
    pub fn mismatches(&self) -> impl Iterator<Item = &CoefficientRow> {
        self.rows.iter().filter(|r| !r.matches())
    }

    pub fn passed(&self) -> bool {
        self.mismatches().next().is_none()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let row = |r: &CoefficientRow| {
            json!({
                "N": r.amplitude,
                "pair_sum": format_rational(&r.pair_sum),
                "count": r.count.to_string(),
                "count_side": format_rational(&r.count_side),
                "ok": r.matches(),
            })
        };
        json!({
            "D": self.degree_cap,
            "checked": self.rows.len(),
            "failures": self.mismatches().map(row).collect::<Vec<_>>(),
            "per_N": self.rows.iter().filter(|r| !r.count.is_zero() || !r.pair_sum.is_zero()).map(row).collect::<Vec<_>>(),
        })
    }
}

/// For each `N` with `ΣN ≤ D`, compares the current-pair sum with
/// `prefactor(N) · #{∂r = φ, ∂b = ψ}_N`.
///
/// The pair sum is regrouped by the split `N = |n| + |m|`, so it only uses
/// current weights and never the multigraph counts.
pub fn coefficient_identity_check(
    graph: &Graph,
    phi: &SourceFunction,
    psi: &SourceFunction,
    degree_cap: u32,
) -> Result<CoefficientReport> {
    let red = current_series(graph, phi, degree_cap)?;
    let blue = current_series(graph, psi, degree_cap)?;
    let rows = amplitudes_up_to(graph.edge_count(), degree_cap)
        .into_par_iter()
        .map(|amplitude| {
            let mut pair_sum = BigRational::zero();
            for a in red.terms.iter().filter(|t| !t.coeff.is_zero()) {
                let Some(rest) = difference(&amplitude, &a.amplitude) else {
                    continue;
                };
                // both series share the graded order, so look up by amplitude
                if let Some(b) = blue.terms.iter().find(|t| t.amplitude == rest) {
                    pair_sum += &a.coeff * &b.coeff;
                }
            }
            let count = count_two_color(graph, &amplitude, phi, psi, CountMethod::Multinomial)?;
            let count_side = amplitude_prefactor(graph, &amplitude) * BigRational::from(BigInt::from(count.clone()));
            Ok(CoefficientRow {
                amplitude,
                pair_sum,
                count,
                count_side,
            })
        })
        .collect::<Result<_>>()?;
    Ok(CoefficientReport { degree_cap, rows })
}

/// `total − part` when it is componentwise nonnegative.
fn difference(total: &EdgeAmplitude, part: &EdgeAmplitude) -> Option<EdgeAmplitude> {
    total
        .values()
        .iter()
        .zip(part.values())
        .map(|(&t, &p)| t.checked_sub(p))
        .collect::<Option<Vec<_>>>()
        .map(EdgeAmplitude::new)
}
