use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::equation::expr::{CoeffExpr, Node};
use crate::equation::rational::RationalMap;
use crate::error::{Error, Result};
use crate::numerics::{Polynomial, PowerSeries};
use crate::scalar::{powc, to_pair, Cplx, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub enum Flavor<T: Scalar> {
    Autonomous(RationalMap<T>),
    NonAutonomous,
}

/// `y(z+1) = (λy + a₂(z)y² + … + a_p(z)y^p) / (1 + b₁(z)y + … + b_q(z)y^q)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EquationSpec<T: Scalar> {
    lambda: Cplx<T>,
    /// `a[0] = a₂`, `a[1] = a₃`, ...
    a: Vec<CoeffExpr<T>>,
    /// `b[0] = b₁`, `b[1] = b₂`, ...
    b: Vec<CoeffExpr<T>>,
    flavor: Flavor<T>,
}

/// Which half-strip a solution lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Side {
    /// `Re z < −ρ`, solutions with `y(z)λ^{−z} → α` as `Re z → −∞`.
    Left,
    /// `Re z > ρ`, solutions with `y(z)λ^{−z} → α` as `Re z → +∞`.
    Right,
}

impl<T: Scalar> EquationSpec<T> {
    pub fn new(lambda: Cplx<T>, a: Vec<CoeffExpr<T>>, b: Vec<CoeffExpr<T>>) -> Result<Self> {
        if lambda.is_zero() {
            return Err(Error::Invalid("λ must be nonzero".into()));
        }
        Ok(EquationSpec {
            lambda,
            a,
            b,
            flavor: Flavor::NonAutonomous,
        })
    }

    /// The autonomous equation `y(z+1) = R(y(z))` for a map with `R(0) = 0`
    /// and a pole-free origin.
    pub fn autonomous(map: RationalMap<T>) -> Result<Self> {
        let d0 = map.den().coeff(0);
        if d0.is_zero() {
            return Err(Error::Invalid("R has a pole at 0".into()));
        }
        if !map.num().coeff(0).is_zero() {
            return Err(Error::Invalid(
                "R(0) ≠ 0; shift to the fixed point first".into(),
            ));
        }
        let lambda = map.num().coeff(1) / d0;
        if lambda.is_zero() {
            return Err(Error::Invalid("R'(0) = 0".into()));
        }
        let a = (2..=map.num().degree())
            .map(|j| CoeffExpr::constant(map.num().coeff(j) / d0))
            .collect();
        let b = (1..=map.den().degree())
            .map(|k| CoeffExpr::constant(map.den().coeff(k) / d0))
            .collect();
        Ok(EquationSpec {
            lambda,
            a,
            b,
            flavor: Flavor::Autonomous(map),
        })
    }

    /// The autonomous equation for `R` recentred at the fixed point `γ`,
    /// i.e. for `y ↦ R(y + γ) − γ`.
    pub fn autonomous_at(map: &RationalMap<T>, gamma: Cplx<T>) -> Result<Self> {
        let num = map
            .num()
            .shifted(gamma)
            .sub(&map.den().shifted(gamma).mul_scalar(gamma));
        let den = map.den().shifted(gamma);
        Self::autonomous(RationalMap::new(num, den)?)
    }

    /// Reads `key=value` lines: `lambda`, `a2`, `a3`, ..., `b1`, `b2`, ...
    /// Blank lines and `#` comments are skipped.
    pub fn from_config(text: &str) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Invalid(format!("line {}: expected key=value", n + 1)))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        Self::from_pairs(&kv)
    }

    pub fn from_pairs(kv: &BTreeMap<String, String>) -> Result<Self> {
        let lam_src = kv
            .get("lambda")
            .ok_or_else(|| Error::Invalid("missing lambda".into()))?;
        let lam = CoeffExpr::<T>::parse(lam_src)?;
        if !lam.is_constant() {
            return Err(Error::Invalid("lambda must be a constant".into()));
        }
        let lambda = lam.eval(Complex::zero())?;
        let collect = |prefix: char, first: usize| -> Result<Vec<CoeffExpr<T>>> {
            let mut idx: Vec<usize> = kv
                .keys()
                .filter_map(|k| k.strip_prefix(prefix).and_then(|n| n.parse::<usize>().ok()))
                .collect();
            idx.sort_unstable();
            if idx.first().is_some_and(|&i| i < first) {
                return Err(Error::Invalid(format!(
                    "{prefix}{} is not a free coefficient",
                    idx[0]
                )));
            }
            let top = idx.last().copied().unwrap_or(first - 1);
            (first..=top)
                .map(|i| match kv.get(&format!("{prefix}{i}")) {
                    Some(src) => CoeffExpr::parse(src),
                    None => Ok(CoeffExpr::constant(Complex::zero())),
                })
                .collect()
        };
        Self::new(lambda, collect('a', 2)?, collect('b', 1)?)
    }

    pub fn lambda(&self) -> Cplx<T> {
        self.lambda
    }

    pub fn a(&self) -> &[CoeffExpr<T>] {
        &self.a
    }

    pub fn b(&self) -> &[CoeffExpr<T>] {
        &self.b
    }

    pub fn flavor(&self) -> &Flavor<T> {
        &self.flavor
    }

    /// `true` when no coefficient depends on `z`.
    pub fn is_constant(&self) -> bool {
        self.a.iter().chain(&self.b).all(CoeffExpr::is_constant)
    }

    /// Numerator `λy + Σ a_j(z)y^j` and denominator `1 + Σ b_k(z)y^k` at `z`.
    pub fn polys_at(&self, z: Cplx<T>) -> Result<(Polynomial<T>, Polynomial<T>)> {
        let mut num = vec![Complex::zero(), self.lambda];
        for e in &self.a {
            num.push(e.eval(z)?);
        }
        let mut den = vec![Complex::one()];
        for e in &self.b {
            den.push(e.eval(z)?);
        }
        Ok((Polynomial::new(num), Polynomial::new(den)))
    }

    /// `F(z, y)`; a vanishing denominator is reported as [`Error::Pole`].
    pub fn rhs(&self, z: Cplx<T>, y: Cplx<T>) -> Result<Cplx<T>> {
        if let Flavor::Autonomous(map) = &self.flavor {
            return map.eval(y);
        }
        let (num, den) = self.polys_at(z)?;
        let d = den.eval(y);
        let size = den
            .coeffs()
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * y.norm() + c.norm());
        if d.norm() <= T::epsilon() * T::of(4.0) * size {
            return Err(Error::Pole { at: to_pair(z) });
        }
        Ok(num.eval(y) / d)
    }

    /// `c₀(z), …, c_J(z)` with `F(z, y) − λy = Σ c_j(z) y^j` (so `c₀ = c₁ = 0`),
    /// from the series quotient `num · recip(den)`.
    pub fn c_values(&self, z: Cplx<T>, j_max: usize) -> Result<Vec<Cplx<T>>> {
        let (num, den) = self.polys_at(z)?;
        let order = j_max + 1;
        let q = num
            .to_series(Complex::zero(), order)
            .mul(&den.to_series(Complex::zero(), order).recip()?)?;
        let mut c: Vec<Cplx<T>> = (0..=j_max).map(|j| q.coeff(j as i32)).collect();
        if j_max >= 1 {
            c[1] = Complex::zero();
        }
        Ok(c)
    }

    /// Checks that every coefficient is finite at the sample points.
    pub fn check_regular(&self, points: &[Cplx<T>]) -> Result<()> {
        for &z in points {
            for e in self.a.iter().chain(&self.b) {
                e.eval(z)?;
            }
        }
        Ok(())
    }

    /// Reproducible JSON echo of the parsed equation.
    pub fn echo(&self) -> serde_json::Value {
        let l = to_pair(self.lambda);
        serde_json::json!({
            "lambda": [l.0, l.1],
            "a": self.a.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
            "b": self.b.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
            "autonomous": matches!(self.flavor, Flavor::Autonomous(_)),
        })
    }
}

/// Exponents `j₁..j_q` of `b₁^{j₁}⋯b_q^{j_q}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    /// `d(τ) = Σ j_k`.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `w(τ) = Σ k·j_k` with `k` starting at 1.
    pub fn weight(&self) -> u32 {
        self.0
            .iter()
            .enumerate()
            .map(|(k, &j)| (k as u32 + 1) * j)
            .sum()
    }

    /// `d! / Π j_k!`, the number of ordered products giving this monomial.
    pub fn multinomial(&self) -> u64 {
        let mut num = 1u64;
        let mut d = 0u64;
        for &j in &self.0 {
            for t in 1..=j as u64 {
                d += 1;
                num = num * d / t;
            }
        }
        num
    }

    /// All multi-indices over `q` variables with weight exactly `w`.
    pub fn with_weight(q: usize, w: u32) -> Vec<MultiIndex> {
        fn rec(k: usize, q: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if k == q {
                if left == 0 {
                    out.push(MultiIndex(cur.clone()));
                }
                return;
            }
            let step = k as u32 + 1;
            for j in 0..=left / step {
                cur.push(j);
                rec(k + 1, q, left - j * step, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(0, q, w, &mut Vec::new(), &mut out);
        out
    }
}

/// `c_j` as an expression tree, with the number of formal terms before
/// like terms are collected.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpandedCoeff<T: Scalar> {
    pub j: usize,
    pub expr: CoeffExpr<T>,
    pub formal_terms: u64,
}

/// `c₂..c_J` from the geometric expansion of the denominator:
/// `c_j = Σ_{i + w(τ) = j} (−1)^{d(τ)} · d(τ)!/Πj_k! · a_i · Π b_k^{j_k}`,
/// with `a₁ = λ`.
pub fn expand_c<T: Scalar>(eq: &EquationSpec<T>, j_max: usize) -> Result<Vec<ExpandedCoeff<T>>> {
    if j_max < 2 {
        return Err(Error::Invalid("expand_c needs J ≥ 2".into()));
    }
    let a_node = |i: usize| -> Node<T> {
        if i == 1 {
            Node::Num(eq.lambda)
        } else {
            eq.a[i - 2].node().clone()
        }
    };
    let q = eq.b.len();
    let mut out = Vec::with_capacity(j_max - 1);
    for j in 2..=j_max {
        let mut sum: Option<Node<T>> = None;
        let mut formal_terms = 0u64;
        for i in 1..=j.min(eq.a.len() + 1) {
            let w = (j - i) as u32;
            if w > 0 && q == 0 {
                continue;
            }
            for tau in MultiIndex::with_weight(q, w) {
                let mult = tau.multinomial();
                formal_terms += mult;
                let mut term = a_node(i);
                for (k, &e) in tau.0.iter().enumerate() {
                    if e > 0 {
                        let f = eq.b[k].node().clone();
                        let f = if e == 1 {
                            f
                        } else {
                            Node::Pow(Box::new(f), e as i32)
                        };
                        term = Node::Mul(Box::new(term), Box::new(f));
                    }
                }
                if mult > 1 {
                    let m = Node::Num(Complex::new(T::of(mult as f64), T::zero()));
                    term = Node::Mul(Box::new(m), Box::new(term));
                }
                sum = Some(match (sum, tau.degree() % 2 == 1) {
                    (None, false) => term,
                    (None, true) => Node::Neg(Box::new(term)),
                    (Some(s), false) => Node::Add(Box::new(s), Box::new(term)),
                    (Some(s), true) => Node::Sub(Box::new(s), Box::new(term)),
                });
            }
        }
        let expr = CoeffExpr::from_node(sum.unwrap_or(Node::Num(Complex::zero())), 'z');
        out.push(ExpandedCoeff {
            j,
            expr,
            formal_terms,
        });
    }
    Ok(out)
}

/// Outcome of sampling `|a_j(z)|/ν^{|z|}` and `|b_k(z)|/ν^{|z|}` on a strip.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundReport {
    pub max_ratio: f64,
    pub worst_at: (f64, f64),
    pub samples: usize,
    /// First sample at which a coefficient was singular.
    pub singular_at: Option<(f64, f64)>,
    pub pass: bool,
}

/// Sample points of the half-strip `∓Re z > ρ`, `|Im z| < σ`, covering
/// `ρ ≤ |Re z| ≤ 3ρ + 10`.
pub fn strip_samples<T: Scalar>(rho: T, sigma: T, side: Side, samples: usize) -> Vec<Cplx<T>> {
    let n_im = ((samples as f64 / 4.0).sqrt().ceil() as usize).max(1);
    let n_re = (samples / n_im).max(1);
    let span = rho * T::of(2.0) + T::of(10.0);
    let sgn = if side == Side::Left {
        -T::one()
    } else {
        T::one()
    };
    let mut pts = Vec::with_capacity(n_re * n_im);
    for r in 0..n_re {
        let re = rho + span * T::int(r as i64) / T::int((n_re.max(2) - 1) as i64);
        for k in 0..n_im {
            let im =
                -sigma + sigma * T::of(2.0) * (T::int(k as i64) + T::of(0.5)) / T::int(n_im as i64);
            pts.push(Complex::new(sgn * re, im));
        }
    }
    pts
}

/// Samples the growth hypothesis `|a_j(z)|, |b_k(z)| ≤ ν^{|z|}` on the strip.
pub fn coeff_bound_check<T: Scalar>(
    eq: &EquationSpec<T>,
    nu: T,
    rho: T,
    sigma: T,
    side: Side,
    samples: usize,
) -> Result<BoundReport> {
    let lam = eq.lambda.norm();
    let ok = match side {
        Side::Left => nu > T::zero() && nu < lam,
        Side::Right => nu > T::zero() && nu < lam && lam < T::one(),
    };
    if !ok {
        return Err(Error::Invalid(format!(
            "ν = {} incompatible with |λ| = {} on the {side:?} side",
            nu.f64(),
            lam.f64()
        )));
    }
    let pts = strip_samples(rho, sigma, side, samples);
    let mut report = BoundReport {
        max_ratio: 0.0,
        worst_at: (0.0, 0.0),
        samples: pts.len(),
        singular_at: None,
        pass: true,
    };
    for &z in &pts {
        let scale = nu.powf(z.norm());
        for e in eq.a.iter().chain(&eq.b) {
            match e.eval(z) {
                Ok(v) => {
                    let r = (v.norm() / scale).f64();
                    if r > report.max_ratio {
                        report.max_ratio = r;
                        report.worst_at = to_pair(z);
                    }
                }
                Err(_) => {
                    report.singular_at.get_or_insert(to_pair(z));
                }
            }
        }
    }
    report.pass = report.singular_at.is_none() && report.max_ratio <= 1.0;
    Ok(report)
}

/// Largest `|c_j(z)| / (|λ| 2^{j−1} ν^{(j−1)|z|})` over the points and `2 ≤ j ≤ J`.
pub fn c_bound_ratio<T: Scalar>(
    eq: &EquationSpec<T>,
    nu: T,
    points: &[Cplx<T>],
    j_max: usize,
) -> Result<f64> {
    let lam = eq.lambda.norm();
    let mut worst = 0.0f64;
    for &z in points {
        let c = eq.c_values(z, j_max)?;
        for (j, cj) in c.iter().enumerate().skip(2) {
            let bound =
                lam * T::of(2f64.powi(j as i32 - 1)) * nu.powf(T::int(j as i64 - 1) * z.norm());
            worst = worst.max((cj.norm() / bound).f64());
        }
    }
    Ok(worst)
}

/// `λ^s` with the principal logarithm of `λ`.
pub fn lambda_pow<T: Scalar>(lambda: Cplx<T>, s: Cplx<T>) -> Cplx<T> {
    powc(lambda, s)
}

/// Series of `F(z, ·)` around `y = 0`, for callers that need more than the
/// `c_j` values.
pub fn rhs_series<T: Scalar>(
    eq: &EquationSpec<T>,
    z: Cplx<T>,
    order: usize,
) -> Result<PowerSeries<T>> {
    let (num, den) = eq.polys_at(z)?;
    num.to_series(Complex::zero(), order)
        .mul(&den.to_series(Complex::zero(), order).recip()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    fn eq(src: &str) -> EquationSpec<f64> {
        EquationSpec::from_config(src).unwrap()
    }

    #[test]
    fn model_equation_has_only_c2() {
        let e = eq("lambda=0.5\na2=1");
        let c = expand_c(&e, 6).unwrap();
        let z = cx(0.3, 0.1);
        assert_eq!(c[0].expr.eval(z).unwrap(), cx(1.0, 0.0));
        for x in &c[1..] {
            assert_eq!(x.expr.eval(z).unwrap(), cx(0.0, 0.0));
        }
    }

    #[test]
    fn pure_denominator_coefficients() {
        // a₂ = 0, b₁ = β: c₂ = −λβ, c₃ = λβ².
        let e = eq("lambda=2\nb1=0.75");
        let c = expand_c(&e, 3).unwrap();
        let z = cx(1.0, 0.0);
        assert!((c[0].expr.eval(z).unwrap() - cx(-1.5, 0.0)).norm() < 1e-15);
        assert!((c[1].expr.eval(z).unwrap() - cx(2.0 * 0.5625, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn tree_and_series_routes_agree() {
        let e = eq("lambda=1.5+0.5*i\na2=z/10\na3=exp(z/20)\nb1=0.3*z\nb2=1/(z+7)\nb3=0.2");
        let trees = expand_c(&e, 8).unwrap();
        for z in [cx(-3.0, 0.5), cx(-12.0, -0.7)] {
            let series = e.c_values(z, 8).unwrap();
            for t in &trees {
                let v = t.expr.eval(z).unwrap();
                assert!(
                    (v - series[t.j]).norm() <= 1e-12 * (1.0 + v.norm()),
                    "c_{} at {z}",
                    t.j
                );
            }
        }
    }

    #[test]
    fn generic_term_count_doubles() {
        let cfg = (2..=7).map(|j| format!("a{j}=z+{j}\n")).collect::<String>()
            + &(1..=6).map(|k| format!("b{k}=z-{k}\n")).collect::<String>();
        let e = eq(&format!("lambda=3\n{cfg}"));
        for t in expand_c(&e, 7).unwrap() {
            assert_eq!(t.formal_terms, 1 << (t.j - 1), "c_{}", t.j);
        }
    }

    #[test]
    fn multi_index_bookkeeping() {
        let all = MultiIndex::with_weight(3, 4);
        assert!(all.iter().all(|t| t.weight() == 4));
        // b₁b₃, b₂², b₁²b₂, b₁⁴ (no b₄ with three variables).
        assert_eq!(all.len(), 4);
        let t = MultiIndex(vec![2, 1, 0]);
        assert_eq!((t.degree(), t.weight(), t.multinomial()), (3, 4, 3));
    }

    #[test]
    fn config_parsing_and_autonomous_equivalence() {
        let e = eq("# model\nlambda = 2\na2 = 1\n");
        let map = RationalMap::parse("2*y + y^2").unwrap();
        let auto = EquationSpec::autonomous(map).unwrap();
        for (z, y) in [(cx(0.0, 0.0), cx(0.2, 0.1)), (cx(-4.0, 1.0), cx(-0.7, 0.0))] {
            assert!((e.rhs(z, y).unwrap() - auto.rhs(z, y).unwrap()).norm() < 1e-15);
        }
        assert!(EquationSpec::<f64>::from_config("a2=1").is_err());
        assert!(EquationSpec::<f64>::from_config("lambda=z").is_err());
        assert!(EquationSpec::<f64>::from_config("lambda=1\na1=3").is_err());
    }

    #[test]
    fn recentring_at_a_fixed_point() {
        let map = RationalMap::<f64>::parse("0.5*y + y^2").unwrap();
        let e = EquationSpec::autonomous_at(&map, cx(0.5, 0.0)).unwrap();
        assert!((e.lambda() - cx(1.5, 0.0)).norm() < 1e-14);
        let y = cx(0.1, 0.0);
        let direct = map.eval(y + 0.5).unwrap() - 0.5;
        assert!((e.rhs(cx(0.0, 0.0), y).unwrap() - direct).norm() < 1e-14);
    }

    #[test]
    fn bound_check_cases() {
        let e = eq("lambda=2\nb1=1");
        let r = coeff_bound_check(&e, 1.5, 10.0, 1.0, Side::Left, 64).unwrap();
        assert!(r.pass);
        let e = eq("lambda=2\nb1=exp(z)");
        let r = coeff_bound_check(&e, 1.8, 10.0, 1.0, Side::Left, 64).unwrap();
        assert!(r.pass);
        let e = eq("lambda=0.5\na2=z");
        let r = coeff_bound_check(&e, 0.4, 10.0, 1.0, Side::Right, 64).unwrap();
        assert!(!r.pass);
        let e = eq("lambda=2\na2=1/(z-z)");
        let r = coeff_bound_check(&e, 1.5, 10.0, 1.0, Side::Left, 16).unwrap();
        assert!(r.singular_at.is_some() && !r.pass);
        assert!(coeff_bound_check(&eq("lambda=2\na2=1"), 2.5, 10.0, 1.0, Side::Left, 16).is_err());
    }

    #[test]
    fn pole_detection_in_rhs() {
        let e = eq("lambda=1\nb1=1");
        assert!(matches!(
            e.rhs(cx(0.0, 0.0), cx(-1.0, 0.0)),
            Err(Error::Pole { .. })
        ));
    }
}
