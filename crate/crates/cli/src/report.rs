//! Report rendering: exact fractions with deterministic decimal companions,
//! as human-readable text or JSON with a stable key order.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use pdlcheck_core::{Bounds, Verdict};
use serde_json::{Map, Value};

/// Render an exact rational as a decimal with six significant digits,
/// rounding half to even. The exact fraction is always reported alongside,
/// so the rounding loses nothing.
pub fn decimal(r: &BigRational) -> String {
    if r.is_zero() {
        return "0".to_string();
    }
    let sign = if r.is_negative() { "-" } else { "" };
    let a = r.abs();
    let (p, q) = (a.numer(), a.denom());

    // Decimal exponent e with 10^e <= a < 10^(e+1). The digit-count guess is
    // off by at most one, so two correction loops settle immediately.
    let mut e = p.to_string().len() as i64 - q.to_string().len() as i64;
    while !at_least_pow10(p, q, e) {
        e -= 1;
    }
    while at_least_pow10(p, q, e + 1) {
        e += 1;
    }

    // Round a / 10^(e-5) to an integer d with exactly six digits.
    let scale = 5 - e;
    let numer = p * pow10(scale.max(0));
    let denom = q * pow10((-scale).max(0));
    let (mut d, rem) = numer.div_rem(&denom);
    let twice = &rem * BigInt::from(2);
    if twice > denom || (twice == denom && d.is_odd()) {
        d += 1;
    }
    if d == pow10(6) {
        d /= BigInt::from(10);
        e += 1;
    }

    let digits = d.to_string();
    let body = if e < 0 {
        format!("0.{}{}", "0".repeat((-e - 1) as usize), digits)
    } else if e < 5 {
        let (whole, frac) = digits.split_at((e + 1) as usize);
        format!("{whole}.{frac}")
    } else if e == 5 {
        digits
    } else {
        format!("{}{}", digits, "0".repeat((e - 5) as usize))
    };
    format!("{sign}{body}")
}

fn pow10(exp: i64) -> BigInt {
    BigInt::from(10).pow(exp as u32)
}

/// Does p/q >= 10^e?
fn at_least_pow10(p: &BigInt, q: &BigInt, e: i64) -> bool {
    if e >= 0 {
        *p >= q * pow10(e)
    } else {
        p * pow10(-e) >= *q
    }
}

/// `{"exact": "2/3", "decimal": "0.666667"}`.
pub fn rational_json(r: &BigRational) -> Value {
    let mut m = Map::new();
    m.insert("exact".to_string(), Value::String(r.to_string()));
    m.insert("decimal".to_string(), Value::String(decimal(r)));
    Value::Object(m)
}

fn pretty(value: Value) -> String {
    let mut text = serde_json::to_string_pretty(&value).expect("report serializes");
    text.push('\n');
    text
}

/// Result of one `check` run.
pub struct CheckReport {
    pub verdict: Verdict,
    /// The box's probability bound, evaluated in the initial valuation.
    /// Absent when the formula is not a top-level box.
    pub bound_evaluated: Option<BigRational>,
    /// Expectation enclosure for the box body; absent like the bound.
    pub bounds: Option<Bounds>,
    pub wall_time_ms: u64,
}

impl CheckReport {
    pub fn text(&self) -> String {
        let mut out = format!("verdict: {}\n", self.verdict);
        if let Verdict::Unknown { cause, .. } = &self.verdict {
            out.push_str(&format!("cause: {cause}\n"));
        }
        if let Some(bound) = &self.bound_evaluated {
            out.push_str(&format!("bound: {} ({})\n", bound, decimal(bound)));
        }
        if let Some(bounds) = &self.bounds {
            out.push_str(&format!(
                "expectation lo: {} ({})\n",
                bounds.lo,
                decimal(&bounds.lo)
            ));
            out.push_str(&format!(
                "expectation hi: {} ({})\n",
                bounds.hi,
                decimal(&bounds.hi)
            ));
            out.push_str(&format!("steps used: {}\n", bounds.steps_used));
        }
        out.push_str(&format!("wall time: {} ms\n", self.wall_time_ms));
        out
    }

    pub fn json(&self) -> String {
        let mut m = Map::new();
        m.insert(
            "verdict".to_string(),
            Value::String(self.verdict.to_string()),
        );
        if let Some(bound) = &self.bound_evaluated {
            m.insert("bound_evaluated".to_string(), rational_json(bound));
        }
        if let Some(bounds) = &self.bounds {
            m.insert("expectation_lo".to_string(), rational_json(&bounds.lo));
            m.insert("expectation_hi".to_string(), rational_json(&bounds.hi));
            m.insert("steps_used".to_string(), bounds.steps_used.into());
        }
        m.insert("wall_time_ms".to_string(), self.wall_time_ms.into());
        pretty(Value::Object(m))
    }
}

/// Result of one `simulate` run: a sampled estimate next to the exact
/// interval that every policy's value must lie in.
pub struct SimulateReport {
    pub estimate: f64,
    pub stderr: f64,
    pub trials: u64,
    pub interval_lo: BigRational,
    pub interval_hi: BigRational,
    pub within_interval: bool,
    pub wall_time_ms: u64,
}

impl SimulateReport {
    pub fn text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("estimate: {:.6}\n", self.estimate));
        out.push_str(&format!("stderr: {:.6}\n", self.stderr));
        out.push_str(&format!("trials: {}\n", self.trials));
        out.push_str(&format!(
            "interval lo: {} ({})\n",
            self.interval_lo,
            decimal(&self.interval_lo)
        ));
        out.push_str(&format!(
            "interval hi: {} ({})\n",
            self.interval_hi,
            decimal(&self.interval_hi)
        ));
        out.push_str(&format!(
            "within interval: {}\n",
            if self.within_interval { "yes" } else { "NO" }
        ));
        out.push_str(&format!("wall time: {} ms\n", self.wall_time_ms));
        out
    }

    pub fn json(&self) -> String {
        let mut m = Map::new();
        m.insert("estimate".to_string(), self.estimate.into());
        m.insert("stderr".to_string(), self.stderr.into());
        m.insert("trials".to_string(), self.trials.into());
        m.insert("interval_lo".to_string(), rational_json(&self.interval_lo));
        m.insert("interval_hi".to_string(), rational_json(&self.interval_hi));
        m.insert(
            "within_interval".to_string(),
            Value::Bool(self.within_interval),
        );
        m.insert("wall_time_ms".to_string(), self.wall_time_ms.into());
        pretty(Value::Object(m))
    }
}
