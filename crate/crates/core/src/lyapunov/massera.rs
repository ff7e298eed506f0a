use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Class-K reshaping function `G` with class-K derivative, built from a
/// sampled decreasing envelope `g` and a nondecreasing weight `h`.
///
/// `G'` is piecewise linear in `s` through the knots `G'(g(t_k)) =
/// e^{-t_k} / max(h(t_k), 1)`, linear down to `G'(0) = 0` below the smallest
/// knot, and continued with the last slope above the largest one. `G` is its
/// exact integral, piecewise quadratic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MasseraFunction {
    times: Vec<f64>,
    g: Vec<f64>,
    h: Vec<f64>,
    /// Knots in ascending `s`, starting at 0.
    knots: Vec<f64>,
    slope: Vec<f64>,
    value: Vec<f64>,
    k1: f64,
    k2: f64,
    tail_g: f64,
    tail_h: f64,
    decay_rate: f64,
}

pub fn massera_g(times: &[f64], g: &[f64], h: impl Fn(f64) -> f64) -> Result<MasseraFunction> {
    let n = times.len();
    if n < 3 || g.len() != n {
        return Err(Error::InvalidArgument("need at least 3 matching (t, g) samples".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("sample times must be strictly increasing".into()));
    }
    if g.windows(2).any(|w| !(w[1] < w[0])) || !(g[n - 1] > 0.0) {
        return Err(Error::InvalidArgument("g must be positive and strictly decreasing".into()));
    }
    let hv: Vec<f64> = times.iter().map(|&t| h(t)).collect();
    if hv.iter().any(|v| !(*v > 0.0)) || hv.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("h must be positive and nondecreasing".into()));
    }
    let gp_at: Vec<f64> = times
        .iter()
        .zip(&hv)
        .map(|(&t, &hk)| (-t).exp() / hk.max(1.0))
        .collect();

    let mut knots = vec![0.0];
    let mut slope = vec![0.0];
    for k in (0..n).rev() {
        knots.push(g[k]);
        slope.push(gp_at[k]);
    }
    let mut value = vec![0.0; knots.len()];
    for i in 1..knots.len() {
        value[i] = value[i - 1] + 0.5 * (slope[i] + slope[i - 1]) * (knots[i] - knots[i - 1]);
    }
    let mut m = MasseraFunction {
        times: times.to_vec(),
        g: g.to_vec(),
        h: hv,
        knots,
        slope,
        value,
        k1: 0.0,
        k2: 0.0,
        tail_g: 0.0,
        tail_h: 0.0,
        decay_rate: 0.0,
    };
    let (s1, s2) = m.riemann_sums(g)?;
    // Exponential extrapolation of G(g(t)) beyond the grid from its decay over the last tenth.
    let w = (n / 10).max(1);
    let (ga, gb) = (m.eval(g[n - 1 - w]), m.eval(g[n - 1]));
    let rate = (ga / gb).ln() / (times[n - 1] - times[n - 1 - w]);
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::Horizon {
            tail: f64::INFINITY,
            limit: crate::tolerances::MASSERA_TAIL_MAX,
            horizon: times[n - 1],
        });
    }
    m.decay_rate = rate;
    m.tail_g = gb / rate;
    let hb = m.derivative(g[n - 1]) * m.h[n - 1];
    let ha = m.derivative(g[n - 1 - w]) * m.h[n - 1 - w];
    let rate_h = (ha / hb).ln() / (times[n - 1] - times[n - 1 - w]);
    m.tail_h = if rate_h > 0.0 { hb / rate_h } else { f64::INFINITY };
    m.k1 = s1 + m.tail_g;
    m.k2 = s2 + m.tail_h;
    Ok(m)
}

impl MasseraFunction {
    fn segment(&self, s: f64) -> usize {
        // Index i with knots[i] <= s < knots[i + 1], clamped to the last segment.
        match self.knots.binary_search_by(|k| k.partial_cmp(&s).unwrap()) {
            Ok(i) => i.min(self.knots.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.knots.len() - 2),
        }
    }

    /// `G'(s)`.
    pub fn derivative(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let i = self.segment(s);
        let (a, b) = (self.knots[i], self.knots[i + 1]);
        let m = (self.slope[i + 1] - self.slope[i]) / (b - a);
        self.slope[i] + m * (s - a)
    }

    /// `G(s)`.
    pub fn eval(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let i = self.segment(s);
        let (a, b) = (self.knots[i], self.knots[i + 1]);
        let m = (self.slope[i + 1] - self.slope[i]) / (b - a);
        let ds = s - a;
        self.value[i] + self.slope[i] * ds + 0.5 * m * ds * ds
    }

    /// Bound on `int_0^inf G(u(t)) dt` over all `0 <= u <= g`.
    pub fn k1(&self) -> f64 {
        self.k1
    }

    /// Bound on `int_0^inf G'(u(t)) h(t) dt` over all `0 <= u <= g`.
    pub fn k2(&self) -> f64 {
        self.k2
    }

    /// Extrapolated `int_T^inf G(g(t)) dt` past the last sample time `T`.
    pub fn tail(&self) -> f64 {
        self.tail_g
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn envelope(&self) -> &[f64] {
        &self.g
    }

    /// `(s, G(s), G'(s))` at every knot, ascending.
    pub fn knots(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.knots
            .iter()
            .zip(&self.value)
            .zip(&self.slope)
            .map(|((s, v), d)| (*s, *v, *d))
    }

    /// Bound on `int_T^inf G(g(t)) dt` for any `T` (inside or past the grid).
    pub fn tail_after(&self, t: f64) -> f64 {
        let n = self.times.len();
        let last = self.times[n - 1];
        if t >= last {
            return self.tail_g * (-self.decay_rate * (t - last)).exp();
        }
        let mut sum = self.tail_g;
        for k in (0..n - 1).rev() {
            let (a, b) = (self.times[k], self.times[k + 1]);
            if b <= t {
                break;
            }
            sum += (b - a.max(t)) * self.eval(self.g[k]);
        }
        sum
    }

    /// Upper Riemann sums of `G(u)` and `G'(u) h` over the grid for a sampled `u <= g`.
    pub fn riemann_sums(&self, u: &[f64]) -> Result<(f64, f64)> {
        if u.len() != self.times.len() {
            return Err(Error::InvalidArgument("u must be sampled on the envelope grid".into()));
        }
        if u.iter().zip(&self.g).any(|(a, b)| *a < 0.0 || *a > *b) {
            return Err(Error::InvalidArgument("u must satisfy 0 <= u <= g".into()));
        }
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for (k, (w, &uk)) in self.times.windows(2).zip(u).enumerate() {
            let dt = w[1] - w[0];
            s1 += dt * self.eval(uk);
            s2 += dt * self.derivative(uk) * self.h[k + 1];
        }
        Ok((s1, s2))
    }
}
