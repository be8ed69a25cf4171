//! Profile functions `θ : [0, λ_max] → ℝ` and their Jordan decomposition
//! through the running maximum.
//!
//! For a curve with offset `c = θ(0)` the positive part is the running
//! maximum `θ⁺(λ) = max_{0≤s≤λ} (θ(s) − c)` and the negative part is
//! `θ⁻ = θ⁺ − (θ − c)`.
//!
//! Both parts are stored as [`ThetaForm::Envelope`]: the curve itself plus the
//! list of plateaus where the record stops rising. Between plateaus the record
//! is the curve, so `θ⁺ − θ⁻ + c` reproduces `θ` up to rounding. Plateau
//! levels are exact for piecewise-linear curves; closed forms are sampled
//! densely and each sampled local maximum is refined by golden-section search.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::star_body::csv_string;

/// Default sample count for decomposing closed-form curves.
pub const DEFAULT_RESOLUTION: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ThetaForm {
    /// `scale·λ^exponent`, `exponent > 0`.
    Power {
        exponent: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// `amplitude·sin(frequency·λ)`.
    Sine { frequency: f64, amplitude: f64 },
    /// `Σ cᵢ λⁱ`, coefficients in ascending degree.
    Polynomial { coefficients: Vec<f64> },
    PiecewiseLinear { xs: Vec<f64>, ys: Vec<f64> },
    /// With `b = base − shift` and `L` the level of the last plateau starting
    /// at or before `λ` (`−∞` before the first), `Record` is `max(b, L)` and
    /// `Gap` is `max(L − b, 0)`.
    Envelope {
        base: Box<ThetaCurve>,
        shift: f64,
        plateaus: Vec<Plateau>,
        part: EnvelopePart,
    },
}

fn one() -> f64 {
    1.0
}

/// The running record is held at `level` from `start` until the base climbs past it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plateau {
    pub start: f64,
    pub level: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopePart {
    Record,
    Gap,
}

/// A continuous profile function on `[0, domain_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCurve")]
pub struct ThetaCurve {
    domain_max: f64,
    form: ThetaForm,
}

#[derive(Deserialize)]
struct RawCurve {
    domain_max: f64,
    form: ThetaForm,
}

impl TryFrom<RawCurve> for ThetaCurve {
    type Error = Error;

    fn try_from(raw: RawCurve) -> Result<Self> {
        ThetaCurve::new(raw.domain_max, raw.form)
    }
}

impl ThetaCurve {
    pub fn new(domain_max: f64, form: ThetaForm) -> Result<Self> {
        if !(domain_max > 0.0 && domain_max.is_finite()) {
            return Err(invalid(format!("domain_max must be positive and finite, got {domain_max}")));
        }
        match &form {
            ThetaForm::Power { exponent, scale } => {
                if !(*exponent > 0.0 && exponent.is_finite()) || !scale.is_finite() {
                    return Err(invalid("power curve needs a positive exponent and finite scale"));
                }
            }
            ThetaForm::Sine { frequency, amplitude } => {
                if !frequency.is_finite() || !amplitude.is_finite() {
                    return Err(invalid("sine parameters must be finite"));
                }
            }
            ThetaForm::Polynomial { coefficients } => {
                if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
                    return Err(invalid("polynomial needs at least one finite coefficient"));
                }
            }
            ThetaForm::PiecewiseLinear { xs, ys } => {
                if xs.len() != ys.len() || xs.len() < 2 {
                    return Err(invalid("piecewise-linear curve needs at least two (x, y) nodes"));
                }
                if xs[0] != 0.0 {
                    return Err(invalid("piecewise-linear curve must start at 0"));
                }
                if xs.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(invalid("piecewise-linear abscissae must be strictly increasing"));
                }
                if xs[xs.len() - 1] != domain_max {
                    return Err(invalid("last piecewise-linear abscissa must equal domain_max"));
                }
                if ys.iter().any(|y| !y.is_finite()) {
                    return Err(invalid("piecewise-linear ordinates must be finite"));
                }
            }
            ThetaForm::Envelope { base, shift, plateaus, .. } => {
                if base.domain_max != domain_max || !shift.is_finite() {
                    return Err(invalid("envelope must share the base domain and have a finite shift"));
                }
                if plateaus.iter().any(|p| !(0.0..=domain_max).contains(&p.start) || !p.level.is_finite())
                    || plateaus.windows(2).any(|w| !(w[1].start > w[0].start))
                {
                    return Err(invalid("envelope plateaus must be finite, inside the domain and strictly ordered"));
                }
            }
        }
        Ok(ThetaCurve { domain_max, form })
    }

    pub fn power(exponent: f64, domain_max: f64) -> Result<Self> {
        Self::new(domain_max, ThetaForm::Power { exponent, scale: 1.0 })
    }

    pub fn neg_power(exponent: f64, domain_max: f64) -> Result<Self> {
        Self::new(domain_max, ThetaForm::Power { exponent, scale: -1.0 })
    }

    pub fn sine(frequency: f64, amplitude: f64, domain_max: f64) -> Result<Self> {
        Self::new(domain_max, ThetaForm::Sine { frequency, amplitude })
    }

    pub fn polynomial(coefficients: Vec<f64>, domain_max: f64) -> Result<Self> {
        Self::new(domain_max, ThetaForm::Polynomial { coefficients })
    }

    /// The domain is `[0, xs.last()]`.
    pub fn piecewise_linear(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let domain_max = *xs.last().ok_or_else(|| invalid("empty piecewise-linear curve"))?;
        Self::new(domain_max, ThetaForm::PiecewiseLinear { xs, ys })
    }

    /// Parses `power:k`, `neg-power:k`, `sine:FREQ,AMP`, `poly:c0,c1,...`
    /// or `pwl:x0,y0,x1,y1,...` on `[0, domain_max]`. A `pwl` descriptor
    /// carries its own domain.
    pub fn parse(descriptor: &str, domain_max: f64) -> Result<Self> {
        let (name, params) = descriptor.split_once(':').unwrap_or((descriptor, ""));
        let nums: Vec<f64> = params
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| p.trim().parse::<f64>().map_err(|_| invalid(format!("bad theta parameter {p:?}"))))
            .collect::<Result<_>>()?;
        match (name, nums.as_slice()) {
            ("power", [k]) => Self::power(*k, domain_max),
            ("neg-power", [k]) => Self::neg_power(*k, domain_max),
            ("sine", [f, a]) => Self::sine(*f, *a, domain_max),
            ("poly", cs) if !cs.is_empty() => Self::polynomial(cs.to_vec(), domain_max),
            ("pwl", pts) if pts.len() >= 4 && pts.len() % 2 == 0 => {
                let (xs, ys) = pts.chunks(2).map(|c| (c[0], c[1])).unzip();
                Self::piecewise_linear(xs, ys)
            }
            _ => Err(invalid(format!("unrecognized theta descriptor {descriptor:?}"))),
        }
    }

    pub fn domain_max(&self) -> f64 {
        self.domain_max
    }

    pub fn form(&self) -> &ThetaForm {
        &self.form
    }

    pub fn is_piecewise_linear(&self) -> bool {
        match &self.form {
            ThetaForm::PiecewiseLinear { .. } => true,
            ThetaForm::Envelope { base, .. } => base.is_piecewise_linear(),
            _ => false,
        }
    }

    /// `θ(λ)`; values outside `[0, domain_max]` are a domain error.
    pub fn eval(&self, lambda: f64) -> Result<f64> {
        if !(0.0..=self.domain_max).contains(&lambda) {
            return Err(Error::Domain(format!("λ = {lambda} outside [0, {}]", self.domain_max)));
        }
        // adding 0.0 turns -0.0 into 0.0
        Ok(self.eval_unchecked(lambda) + 0.0)
    }

    pub(crate) fn eval_unchecked(&self, lambda: f64) -> f64 {
        match &self.form {
            ThetaForm::Power { exponent, scale } => scale * lambda.powf(*exponent),
            ThetaForm::Sine { frequency, amplitude } => amplitude * (frequency * lambda).sin(),
            ThetaForm::Polynomial { coefficients } => coefficients.iter().rev().fold(0.0, |acc, c| acc * lambda + c),
            ThetaForm::PiecewiseLinear { xs, ys } => interpolate(xs, ys, lambda),
            ThetaForm::Envelope { base, shift, plateaus, part } => {
                let b = base.eval_unchecked(lambda) - shift;
                let i = plateaus.partition_point(|p| p.start <= lambda);
                let level = if i == 0 { f64::NEG_INFINITY } else { plateaus[i - 1].level };
                match part {
                    EnvelopePart::Record => b.max(level),
                    EnvelopePart::Gap => (level - b).max(0.0),
                }
            }
        }
    }

    /// A Lipschitz constant on `[0, domain_max]`, when one exists.
    pub fn lipschitz(&self) -> Option<f64> {
        let lmax = self.domain_max;
        match &self.form {
            ThetaForm::Power { exponent, scale } => {
                if *exponent >= 1.0 {
                    Some(scale.abs() * exponent * lmax.powf(exponent - 1.0))
                } else {
                    None
                }
            }
            ThetaForm::Sine { frequency, amplitude } => Some((frequency * amplitude).abs()),
            ThetaForm::Polynomial { coefficients } => Some(
                coefficients
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(i, c)| i as f64 * c.abs() * lmax.powi(i as i32 - 1))
                    .sum(),
            ),
            ThetaForm::PiecewiseLinear { xs, ys } => Some(
                xs.windows(2)
                    .zip(ys.windows(2))
                    .map(|(x, y)| ((y[1] - y[0]) / (x[1] - x[0])).abs())
                    .fold(0.0, f64::max),
            ),
            ThetaForm::Envelope { base, .. } => base.lipschitz(),
        }
    }

    /// `max_{[0, upto]} |θ|`.
    pub fn sup_abs(&self, upto: f64) -> Result<f64> {
        self.sup_abs_shifted(upto, 0.0)
    }

    /// `max_{[0, upto]} |θ − θ(0)|`.
    pub fn sup_oscillation(&self, upto: f64) -> Result<f64> {
        self.sup_abs_shifted(upto, self.eval_unchecked(0.0))
    }

    fn sup_abs_shifted(&self, upto: f64, shift: f64) -> Result<f64> {
        if !(0.0..=self.domain_max).contains(&upto) {
            return Err(Error::Domain(format!("λ = {upto} outside [0, {}]", self.domain_max)));
        }
        let abs = |x: f64| (self.eval_unchecked(x) - shift).abs();
        let mut best = abs(0.0).max(abs(upto));
        if let ThetaForm::PiecewiseLinear { xs, ys } = &self.form {
            for (x, y) in xs.iter().zip(ys) {
                if *x <= upto {
                    best = best.max((y - shift).abs());
                }
            }
            return Ok(best);
        }
        if upto == 0.0 {
            return Ok(best);
        }
        const SAMPLES: usize = 20_001;
        let h = upto / (SAMPLES - 1) as f64;
        let ys: Vec<f64> = (0..SAMPLES).map(|j| abs(j as f64 * h)).collect();
        for j in 0..SAMPLES {
            let left = if j > 0 { ys[j - 1] } else { f64::NEG_INFINITY };
            let right = if j + 1 < SAMPLES { ys[j + 1] } else { f64::NEG_INFINITY };
            best = best.max(ys[j]);
            if ys[j] >= left && ys[j] >= right {
                let lo = (j.saturating_sub(1)) as f64 * h;
                let hi = ((j + 1).min(SAMPLES - 1)) as f64 * h;
                best = best.max(golden_max(&abs, lo, hi).1);
            }
        }
        Ok(best)
    }

    /// Running maximum `M(λ) = max_{[0,λ]} θ`.
    ///
    /// Exact for piecewise-linear input; closed forms locate their plateaus
    /// from `resolution` uniform samples plus local refinement.
    pub fn running_max(&self, resolution: usize) -> Result<ThetaCurve> {
        self.envelope(0.0, self.plateaus(resolution, 0.0)?, EnvelopePart::Record)
    }

    /// Jordan decomposition `θ = θ⁺ − θ⁻ + offset` with `offset = θ(0)`.
    pub fn decompose(&self, resolution: usize) -> Result<ThetaDecomposition> {
        let offset = self.eval_unchecked(0.0);
        let plateaus = self.plateaus(resolution, offset)?;
        Ok(ThetaDecomposition {
            plus: self.envelope(offset, plateaus.clone(), EnvelopePart::Record)?,
            minus: self.envelope(offset, plateaus, EnvelopePart::Gap)?,
            offset,
        })
    }

    fn envelope(&self, shift: f64, plateaus: Vec<Plateau>, part: EnvelopePart) -> Result<ThetaCurve> {
        let form = ThetaForm::Envelope { base: Box::new(self.clone()), shift, plateaus, part };
        ThetaCurve::new(self.domain_max, form)
    }

    /// Plateaus of the running record of `θ − shift`.
    fn plateaus(&self, resolution: usize, shift: f64) -> Result<Vec<Plateau>> {
        let (xs, ys) = self.samples(resolution)?;
        let mut plateaus = Vec::new();
        let mut record = ys[0];
        let mut rising = true;
        for i in 1..xs.len() {
            if ys[i] > record {
                record = ys[i];
                rising = true;
            } else if rising {
                plateaus.push(Plateau { start: xs[i - 1], level: record - shift });
                rising = false;
            }
        }
        Ok(plateaus)
    }

    /// Uniform samples augmented with refined local maxima.
    fn samples(&self, resolution: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        if resolution < 2 {
            return Err(invalid("resolution must be at least 2"));
        }
        if let ThetaForm::PiecewiseLinear { xs, ys } = &self.form {
            return Ok((xs.clone(), ys.clone()));
        }
        let f = |x: f64| self.eval_unchecked(x);
        let h = self.domain_max / (resolution - 1) as f64;
        let xs: Vec<f64> = (0..resolution)
            .map(|j| if j + 1 == resolution { self.domain_max } else { j as f64 * h })
            .collect();
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        if ys.iter().any(|y| !y.is_finite()) {
            return Err(invalid("curve is not finite on its domain"));
        }

        let mut extra: Vec<(f64, f64)> = Vec::new();
        for j in 1..resolution {
            let left = ys[j - 1];
            let right = if j + 1 < resolution { ys[j + 1] } else { f64::NEG_INFINITY };
            if ys[j] >= left && ys[j] >= right && !(ys[j] == left && ys[j] == right) {
                let hi = if j + 1 < resolution { xs[j + 1] } else { xs[j] };
                let (x, y) = golden_max(&f, xs[j - 1], hi);
                if y > ys[j] {
                    extra.push((x, y));
                }
            }
        }
        if ys[0] > ys[1] {
            let (x, y) = golden_max(&f, 0.0, xs[1]);
            if y > ys[0] {
                extra.push((x, y));
            }
        }
        if extra.is_empty() {
            return Ok((xs, ys));
        }
        extra.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut mx = Vec::with_capacity(resolution + extra.len());
        let mut my = Vec::with_capacity(resolution + extra.len());
        let mut k = 0;
        for (x, y) in xs.into_iter().zip(ys) {
            while k < extra.len() && extra[k].0 < x {
                if mx.last().is_none_or(|last| extra[k].0 > *last) {
                    mx.push(extra[k].0);
                    my.push(extra[k].1);
                }
                k += 1;
            }
            while k < extra.len() && extra[k].0 == x {
                k += 1;
            }
            mx.push(x);
            my.push(y);
        }
        Ok((mx, my))
    }
}

impl fmt::Display for ThetaCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.form {
            ThetaForm::Power { exponent, scale } if *scale == 1.0 => write!(f, "power:{exponent}"),
            ThetaForm::Power { exponent, scale } if *scale == -1.0 => write!(f, "neg-power:{exponent}"),
            ThetaForm::Power { exponent, scale } => write!(f, "{scale}*power:{exponent}"),
            ThetaForm::Sine { frequency, amplitude } => write!(f, "sine:{frequency},{amplitude}"),
            ThetaForm::Polynomial { coefficients } => {
                let cs: Vec<String> = coefficients.iter().map(|c| c.to_string()).collect();
                write!(f, "poly:{}", cs.join(","))
            }
            ThetaForm::PiecewiseLinear { xs, ys } => {
                let pts: Vec<String> = xs.iter().zip(ys).map(|(x, y)| format!("{x},{y}")).collect();
                write!(f, "pwl:{}", pts.join(","))
            }
            ThetaForm::Envelope { base, part: EnvelopePart::Record, .. } => write!(f, "record({base})"),
            ThetaForm::Envelope { base, part: EnvelopePart::Gap, .. } => write!(f, "gap({base})"),
        }
    }
}

impl FromStr for ThetaCurve {
    type Err = Error;

    /// Accepts the JSON curve descriptor.
    fn from_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// `θ = θ⁺ − θ⁻ + offset` with `θ⁺(0) = θ⁻(0) = 0`, both nonnegative, `θ⁺` nondecreasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaDecomposition {
    pub plus: ThetaCurve,
    pub minus: ThetaCurve,
    pub offset: f64,
}

impl ThetaDecomposition {
    /// CSV table `lambda,theta,theta_plus,theta_minus` at multiples of `step`
    /// (plus the domain end).
    pub fn table_csv(&self, theta: &ThetaCurve, step: f64) -> Result<String> {
        if !(step > 0.0) {
            return Err(invalid("step must be positive"));
        }
        let lmax = theta.domain_max().min(self.plus.domain_max());
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["lambda", "theta", "theta_plus", "theta_minus"])?;
        let count = (lmax / step).floor() as usize;
        let mut lambdas: Vec<f64> = (0..=count).map(|k| k as f64 * step).filter(|l| *l <= lmax).collect();
        if lambdas.last().is_none_or(|l| *l < lmax) {
            lambdas.push(lmax);
        }
        for l in lambdas {
            w.write_record([
                l.to_string(),
                theta.eval(l)?.to_string(),
                self.plus.eval(l)?.to_string(),
                self.minus.eval(l)?.to_string(),
            ])?;
        }
        csv_string(w)
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let i = xs.partition_point(|v| *v <= x);
    if i == 0 {
        return ys[0];
    }
    if i == xs.len() {
        return ys[xs.len() - 1];
    }
    let (x0, x1, y0, y1) = (xs[i - 1], xs[i], ys[i - 1], ys[i]);
    if x == x0 {
        return y0;
    }
    y0 + (y1 - y0) * ((x - x0) / (x1 - x0))
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a maximum of `f` on `[lo, hi]`; returns the
/// best point seen, endpoints included.
fn golden_max(f: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut best = if f(lo) >= f(hi) { (lo, f(lo)) } else { (hi, f(hi)) };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a <= 1e-15 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        for (x, y) in [(c, fc), (d, fd)] {
            if y > best.1 {
                best = (x, y);
            }
        }
    }
    best
}
