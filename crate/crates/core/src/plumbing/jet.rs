//! Truncated Laurent jets of differentials `sum c_m z^m dz` in a node chart,
//! the plumbing pullback and residue extraction against kernel jets.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::poly::Poly;
use super::PlumbingError;

/// Which coefficients of a jet are known exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Precision {
    /// Every coefficient is stored.
    Exact,
    /// Coefficients of `z^m` are known for `m < k`.
    Below(i32),
    /// Coefficients of `z^m` are known for `m >= power`; the unknown tail is
    /// divisible by `s[s_edge]^s_valuation`.
    Above { power: i32, s_edge: String, s_valuation: i32 },
}

/// A differential jet `sum_m coeffs[m - start] z^m dz` in the chart `chart`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalJet {
    pub chart: String,
    pub start: i32,
    pub coeffs: Vec<Poly>,
    pub precision: Precision,
}

impl LocalJet {
    pub fn zero(chart: impl Into<String>, precision: Precision) -> Self {
        LocalJet { chart: chart.into(), start: 0, coeffs: Vec::new(), precision }
    }

    pub fn exact(chart: impl Into<String>, start: i32, coeffs: Vec<Poly>) -> Self {
        LocalJet { chart: chart.into(), start, coeffs, precision: Precision::Exact }
    }

    pub fn coefficient(&self, m: i32) -> Poly {
        let i = m - self.start;
        if i < 0 {
            return Poly::zero();
        }
        self.coeffs.get(i as usize).cloned().unwrap_or_else(Poly::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Poly::is_zero)
    }

    /// Known `(power, coefficient)` pairs with nonzero coefficient.
    pub fn terms(&self) -> impl Iterator<Item = (i32, &Poly)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (self.start + i as i32, c))
    }

    pub fn truncate_s(&self, t: Option<u32>) -> LocalJet {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c = c.truncate_s(t);
        }
        out.trim()
    }

    fn trim(mut self) -> LocalJet {
        while self.coeffs.last().is_some_and(Poly::is_zero) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead == self.coeffs.len() {
            self.coeffs.clear();
            self.start = 0;
        } else if lead > 0 {
            self.coeffs.drain(..lead);
            self.start += lead as i32;
        }
        self
    }

    /// Sum of two jets in the same chart.
    pub fn add(&self, other: &LocalJet) -> Result<LocalJet, PlumbingError> {
        if self.chart != other.chart {
            return Err(PlumbingError::ChartMismatch(self.chart.clone(), other.chart.clone()));
        }
        let precision = combine_precision(&self.precision, &other.precision)?;
        if self.coeffs.is_empty() {
            return Ok(LocalJet { precision, ..other.clone() });
        }
        if other.coeffs.is_empty() {
            return Ok(LocalJet { precision, ..self.clone() });
        }
        let start = self.start.min(other.start);
        let end = (self.start + self.coeffs.len() as i32).max(other.start + other.coeffs.len() as i32);
        let coeffs = (start..end).map(|m| &self.coefficient(m) + &other.coefficient(m)).collect();
        Ok(LocalJet { chart: self.chart.clone(), start, coeffs, precision }.trim())
    }

    pub fn scale(&self, c: &Poly) -> LocalJet {
        LocalJet { coeffs: self.coeffs.iter().map(|x| x * c).collect(), ..self.clone() }.trim()
    }
}

fn combine_precision(a: &Precision, b: &Precision) -> Result<Precision, PlumbingError> {
    use Precision::*;
    Ok(match (a, b) {
        (Exact, p) | (p, Exact) => p.clone(),
        (Below(x), Below(y)) => Below(*x.min(y)),
        (
            Above { power: p, s_edge: e, s_valuation: v },
            Above { power: q, s_edge: f, s_valuation: w },
        ) if e == f => Above { power: *p.max(q), s_edge: e.clone(), s_valuation: *v.min(w) },
        _ => return Err(PlumbingError::IncompatiblePrecision),
    })
}

impl fmt::Display for LocalJet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.terms().map(|(m, c)| format!("({c})*z[{}]^{m}", self.chart)).collect();
        if parts.is_empty() {
            write!(f, "0")?;
        } else {
            write!(f, "{}", parts.join(" + "))?;
        }
        match &self.precision {
            Precision::Exact => Ok(()),
            Precision::Below(k) => write!(f, " + O(z[{}]^{k})", self.chart),
            Precision::Above { power, s_edge, s_valuation } => {
                write!(f, " + s[{s_edge}]^{s_valuation}*O(z[{}]^<{power})", self.chart)
            }
        }
    }
}

/// Pulls a jet in the chart at `-e` back along `z_{-e} = s_e / z_e` into
/// the chart `target_chart` at `e`:
/// `z^n dz  ->  -s^(n+1) z^(-n-2) dz`.
pub fn pullback_transition(jet: &LocalJet, s_edge: &str, target_chart: &str) -> LocalJet {
    let mut terms: Vec<(i32, Poly)> = jet
        .terms()
        .map(|(n, c)| (-n - 2, -&(c * &Poly::s(s_edge, n + 1))))
        .collect();
    terms.sort_by_key(|(m, _)| *m);
    let precision = match &jet.precision {
        Precision::Exact => Precision::Exact,
        Precision::Below(k) => Precision::Above { power: -k - 1, s_edge: s_edge.to_string(), s_valuation: k + 1 },
        Precision::Above { power, .. } => Precision::Below(-power - 1),
    };
    let Some(&(low, _)) = terms.first() else {
        return LocalJet::zero(target_chart, precision);
    };
    let high = terms.last().map(|(m, _)| *m).unwrap_or(low);
    let mut coeffs = vec![Poly::zero(); (high - low + 1) as usize];
    for (m, c) in terms {
        coeffs[(m - low) as usize] = c;
    }
    LocalJet { chart: target_chart.to_string(), start: low, coeffs, precision }
}

/// Kernel coefficients `table[a][b]` of `z^a zeta^b`, already multiplied by
/// `2 pi i`, with `a < z_precision` and `b < zeta_precision` known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelJet {
    /// Chart of the output variable `z`.
    pub out_chart: String,
    pub z_precision: usize,
    pub zeta_precision: usize,
    pub table: Vec<Vec<Poly>>,
}

impl KernelJet {
    pub fn coefficient(&self, a: usize, b: usize) -> &Poly {
        &self.table[a][b]
    }
}

/// Genus-0 kernel between distinct charts centered at `q_out` and `q_in`:
/// `2 pi i K = dz / (z - zeta + q_out - q_in)`, so
/// `table[a][b] = (-1)^a C(a+b, a) / delta^(a+b+1)`.
pub fn rational_kernel(
    out_chart: &str,
    q_out: &BigRational,
    q_in: &BigRational,
    z_precision: usize,
    zeta_precision: usize,
) -> KernelJet {
    let delta = q_out - q_in;
    let table = (0..z_precision)
        .map(|a| {
            (0..zeta_precision)
                .map(|b| {
                    let binom = num_integer::binomial(BigInt::from(a + b), BigInt::from(a));
                    let sign = if a % 2 == 0 { 1 } else { -1 };
                    let mut denom = BigRational::from_integer(BigInt::from(1));
                    for _ in 0..=(a + b) {
                        denom *= &delta;
                    }
                    Poly::constant(BigRational::from_integer(binom * sign) / denom)
                })
                .collect()
        })
        .collect();
    KernelJet { out_chart: out_chart.to_string(), z_precision, zeta_precision, table }
}

/// The contour integral `(1/2 pi i) oint K(z, zeta) * integrand(zeta)` over a
/// small positively oriented circle: for each term `c zeta^m`, `m <= -1`,
/// the kernel coefficient `b = -m - 1` contributes `table[a][b] * c z^a`.
/// The `2 pi i` of the residue theorem cancels the kernel normalization.
///
/// `s_trunc` is the per-variable truncation the caller works modulo; an
/// unknown integrand tail is acceptable only if it vanishes modulo it.
pub fn residue_integrate(
    kernel: &KernelJet,
    integrand: &LocalJet,
    s_trunc: Option<u32>,
) -> Result<LocalJet, PlumbingError> {
    match &integrand.precision {
        Precision::Exact => {}
        Precision::Below(k) if *k >= 0 => {}
        Precision::Below(_) => return Err(PlumbingError::TruncationUnderflow { chart: integrand.chart.clone() }),
        Precision::Above { s_valuation, .. } => {
            if !s_trunc.is_some_and(|t| *s_valuation > t as i32) {
                return Err(PlumbingError::TruncationUnderflow { chart: integrand.chart.clone() });
            }
        }
    }
    let mut coeffs = vec![Poly::zero(); kernel.z_precision];
    for (m, c) in integrand.terms() {
        if m >= 0 {
            continue;
        }
        let b = (-m - 1) as usize;
        if b >= kernel.zeta_precision {
            return Err(PlumbingError::PoleOrderExceedsKernel { order: -m, available: kernel.zeta_precision });
        }
        for (a, slot) in coeffs.iter_mut().enumerate() {
            let k = kernel.coefficient(a, b);
            if !k.is_zero() {
                slot.add_assign(&(k * c));
            }
        }
    }
    let jet = LocalJet {
        chart: kernel.out_chart.clone(),
        start: 0,
        coeffs,
        precision: Precision::Below(kernel.z_precision as i32),
    };
    Ok(jet.truncate_s(s_trunc))
}
