//! Upper half-plane model of the hyperbolic plane.
//!
//! Points are `(x, y)` with `y > 0` and distance
//! `d = acosh(1 + ((Δx)² + (Δy)²) / (2·y₁·y₂))`.
//!
//! # Precision
//!
//! At hyperbolic distance `r` from the basepoint most points sit at height
//! `y ~ e^{-r}` while their `x` coordinate stays of order one, so a single
//! f64 `x` quantizes neighborhoods of such points at hyperbolic scale
//! `ulp(x)/y ~ ε·e^{r}` — far too coarse for witness audits at `r ≈ 40`.
//! Each point therefore carries a second word `x_lo` so that `x + x_lo`
//! holds the abscissa to roughly double precision squared. Geodesic
//! evaluation populates `x_lo` by accumulating exact rounding residues, and
//! the distance kernel consumes it through a compensated subtraction, which
//! keeps distances between nearby deep points accurate. User-constructed
//! points have `x_lo = 0`.

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Inputs with `y` at or below this threshold are rejected rather than
/// clamped; clamping would silently distort distances.
pub const MIN_INPUT_Y: f64 = 1e-12;

/// A point of the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "H2PointRepr", into = "H2PointRepr")]
pub struct H2Point {
    x: f64,
    x_lo: f64,
    y: f64,
}

#[derive(Serialize, Deserialize)]
struct H2PointRepr {
    x: f64,
    y: f64,
}

impl TryFrom<H2PointRepr> for H2Point {
    type Error = ModelError;
    fn try_from(r: H2PointRepr) -> Result<Self, ModelError> {
        H2Point::new(r.x, r.y)
    }
}

impl From<H2Point> for H2PointRepr {
    fn from(p: H2Point) -> Self {
        H2PointRepr { x: p.x(), y: p.y() }
    }
}

impl H2Point {
    /// Validate external coordinates. Degenerate inputs (`y ≤ 1e-12`, or
    /// any non-finite coordinate) are rejected as outside the domain.
    pub fn new(x: f64, y: f64) -> Result<Self, ModelError> {
        if !x.is_finite() || !y.is_finite() || y <= MIN_INPUT_Y {
            return Err(ModelError::PointOutsideDomain(format!(
                "({x}, {y}) is not in the open upper half-plane (y must exceed {MIN_INPUT_Y})"
            )));
        }
        Ok(Self { x, x_lo: 0.0, y })
    }

    /// Internal constructor for computed points, which may legitimately sit
    /// far below the input threshold.
    pub(crate) fn from_parts(x: f64, x_lo: f64, y: f64) -> Self {
        debug_assert!(y > 0.0 && y.is_finite(), "computed H2 point with y = {y}");
        Self { x, x_lo, y }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    /// Same abscissa (including the low word) at a different height; the
    /// vertical line through a point is a geodesic, so this moves along it.
    pub(crate) fn at_height(&self, y: f64) -> Self {
        Self::from_parts(self.x, self.x_lo, y)
    }
}

/// Exact sum: returns `(fl(a+b), err)` with `a + b = fl(a+b) + err`.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bv = s - a;
    let err = (a - (s - bv)) + (b - bv);
    (s, err)
}

/// Exact difference: returns `(fl(a−b), err)` with `a − b = fl(a−b) + err`.
#[inline]
fn two_diff(a: f64, b: f64) -> (f64, f64) {
    let s = a - b;
    let bv = s - a;
    let err = (a - (s - bv)) - (b + bv);
    (s, err)
}

/// Compensated abscissa difference `p.x − q.x` including the low words.
#[inline]
fn delta_x(p: &H2Point, q: &H2Point) -> f64 {
    let (hi, lo) = two_diff(p.x, q.x);
    hi + (lo + (p.x_lo - q.x_lo))
}

/// `acosh(1 + a)` for `a ≥ 0` without the precision loss of forming `1 + a`.
#[inline]
fn acosh1p(a: f64) -> f64 {
    debug_assert!(a >= -1e-12);
    let a = a.max(0.0);
    (a + (a * (a + 2.0)).sqrt()).ln_1p()
}

/// Hyperbolic distance between two points.
pub fn distance(p: &H2Point, q: &H2Point) -> f64 {
    let dx = delta_x(p, q);
    let dy = p.y - q.y;
    acosh1p((dx * dx + dy * dy) / (2.0 * p.y * q.y))
}

/// The point at arc length `s` from `p` on the geodesic from `p` to `q`.
///
/// The geodesic through `p` and `q` is the circle `u ↦ (c − r·tanh u,
/// r·sech u)` centered at `(c, 0)`; the parameter `u` is exact arc length,
/// so interpolation reduces to shifting `u`. All quantities are formed from
/// coordinate differences and the offset from `p` is added back with a
/// compensated sum, which keeps the result accurate relative to `p` even
/// deep inside a horoball.
pub fn geodesic_point(p: &H2Point, q: &H2Point, s: f64) -> Result<H2Point, ModelError> {
    let total = distance(p, q);
    if s < -1e-9 || s > total + 1e-9 {
        return Err(ModelError::ParameterOutOfRange {
            value: s,
            lo: 0.0,
            hi: total,
        });
    }
    let s = s.clamp(0.0, total);
    if s == 0.0 || total == 0.0 {
        return Ok(*p);
    }
    if s == total {
        return Ok(*q);
    }
    if s > 0.5 * total {
        // Evaluate from the nearer endpoint: the offset is then small
        // relative to that endpoint, which is what the compensated sum
        // preserves.
        return geodesic_point(q, p, total - s);
    }

    let dx = delta_x(q, p);
    if dx == 0.0 {
        // Vertical geodesic: exponential in y.
        let sign = if q.y > p.y { 1.0 } else { -1.0 };
        return Ok(H2Point::from_parts(p.x, p.x_lo, p.y * (sign * s).exp()));
    }

    let dy = q.y - p.y;
    let sy = q.y + p.y;
    // Center offset from p: c − p.x, and circle radius through p.
    let cp = 0.5 * dx + sy * dy / (2.0 * dx);
    let radius = cp.hypot(p.y);
    let u_p = (cp / p.y).asinh();
    // x(u) decreases in u, so the step toward q has sign −sign(dx).
    let sigma = if dx < 0.0 { s } else { -s };
    let u_w = u_p + sigma;
    let cosh_w = u_w.cosh();
    let y_w = radius / cosh_w;
    // Offset from p.x: r·(tanh u_p − tanh u_w) = −p.y·sinh σ / cosh u_w,
    // using cosh u_p = r/p.y exactly by the definition of `radius`.
    let offset = -p.y * sigma.sinh() / cosh_w;
    let (x_hi, x_err) = two_sum(p.x, offset);
    Ok(H2Point::from_parts(x_hi, x_err + p.x_lo, y_w))
}

/// Parse a point list: one `x,y` pair per line, empty lines skipped.
/// Points go through the same gate as [`H2Point::new`].
pub fn points_from_csv(text: &str) -> Result<Vec<H2Point>, ModelError> {
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut cells = line.split(',').map(str::trim);
        let (x, y) = match (cells.next(), cells.next(), cells.next()) {
            (Some(x), Some(y), None) => (x, y),
            _ => {
                return Err(ModelError::PointOutsideDomain(format!(
                    "line {}: expected exactly two fields",
                    lineno + 1
                )))
            }
        };
        let parse = |cell: &str| {
            cell.parse::<f64>().map_err(|e| {
                ModelError::PointOutsideDomain(format!("line {}: {e}", lineno + 1))
            })
        };
        points.push(H2Point::new(parse(x)?, parse(y)?)?);
    }
    Ok(points)
}

/// Render a point list as `x,y` rows.
pub fn points_to_csv(points: &[H2Point]) -> String {
    let mut out = String::new();
    for p in points {
        out.push_str(&format!("{},{}\n", p.x(), p.y()));
    }
    out
}

/// The point at hyperbolic distance `r` from `base` in tangent direction
/// `theta` (radians, `0` pointing along the vertical ray).
///
/// Computed through the Poincaré-disk exponential map at the basepoint and
/// mapped back, with the small quantities (`1 − ρ`, `1 − cos θ`) formed
/// from exact expressions so the height keeps full relative precision.
pub fn radial_point(base: &H2Point, r: f64, theta: f64) -> H2Point {
    debug_assert!(r >= 0.0);
    if r == 0.0 {
        return *base;
    }
    let em = (-r).exp();
    let rho = (1.0 - em) / (1.0 + em); // tanh(r/2)
    let one_minus_rho = 2.0 * em / (1.0 + em);
    let one_minus_rho2 = 4.0 * em / ((1.0 + em) * (1.0 + em));
    let half = 0.5 * theta;
    let denom = one_minus_rho * one_minus_rho + 4.0 * rho * half.sin() * half.sin();
    let y = base.y * one_minus_rho2 / denom;
    let x_off = -base.y * 2.0 * rho * theta.sin() / denom;
    let (x_hi, x_err) = two_sum(base.x, x_off);
    H2Point::from_parts(x_hi, x_err + base.x_lo, y)
}
