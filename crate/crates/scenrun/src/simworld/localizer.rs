//! Range-only position estimation: Gauss-Newton least squares over the
//! measured distances to known landmarks.

/// One usable range measurement: landmark position and measured distance.
#[derive(Debug, Clone, Copy)]
pub struct RangeMeasurement {
    pub landmark: (f64, f64),
    pub range: f64,
}

const MAX_ITERS: usize = 10;
const TOL: f64 = 1e-6;

/// Solve for the position minimizing the squared range residuals, starting
/// from `initial` (the previous estimate). Returns `None` when fewer than
/// three ranges are available or the iteration diverges (three consecutive
/// residual-norm increases); callers then fall back to dead reckoning.
pub fn solve(initial: (f64, f64), measurements: &[RangeMeasurement]) -> Option<(f64, f64)> {
    if measurements.len() < 3 {
        return None;
    }
    let (mut x, mut y) = initial;
    let mut prev_norm = f64::INFINITY;
    let mut growths = 0;
    for _ in 0..MAX_ITERS {
        // normal equations J^T J d = -J^T r for r_i = |p - l_i| - z_i
        let (mut jtj00, mut jtj01, mut jtj11) = (0.0, 0.0, 0.0);
        let (mut jtr0, mut jtr1) = (0.0, 0.0);
        let mut norm = 0.0;
        for m in measurements {
            let dx = x - m.landmark.0;
            let dy = y - m.landmark.1;
            let dist = (dx * dx + dy * dy).sqrt().max(1e-9);
            let r = dist - m.range;
            let (jx, jy) = (dx / dist, dy / dist);
            jtj00 += jx * jx;
            jtj01 += jx * jy;
            jtj11 += jy * jy;
            jtr0 += jx * r;
            jtr1 += jy * r;
            norm += r * r;
        }
        if norm > prev_norm {
            growths += 1;
            if growths >= 3 {
                return None;
            }
        } else {
            growths = 0;
        }
        prev_norm = norm;
        let det = jtj00 * jtj11 - jtj01 * jtj01;
        if det.abs() < 1e-12 {
            return None; // degenerate geometry (collinear landmarks)
        }
        let dx = -(jtj11 * jtr0 - jtj01 * jtr1) / det;
        let dy = -(jtj00 * jtr1 - jtj01 * jtr0) / det;
        x += dx;
        y += dy;
        if dx.hypot(dy) < TOL {
            break;
        }
    }
    Some((x, y))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ranges_from(truth: (f64, f64), landmarks: &[(f64, f64)]) -> Vec<RangeMeasurement> {
        landmarks
            .iter()
            .map(|&l| RangeMeasurement {
                landmark: l,
                range: ((truth.0 - l.0).powi(2) + (truth.1 - l.1).powi(2)).sqrt(),
            })
            .collect()
    }

    const CORNERS: [(f64, f64); 4] = [(-3.25, 3.25), (3.25, 3.25), (-3.25, -3.25), (3.25, -3.25)];

    #[test]
    fn exact_ranges_recover_position() {
        let truth = (1.3, -0.7);
        let meas = ranges_from(truth, &CORNERS);
        let (x, y) = solve((0.0, 0.0), &meas).unwrap();
        assert!((x - truth.0).abs() < 1e-6 && (y - truth.1).abs() < 1e-6);
    }

    #[test]
    fn converges_from_distant_initial_guess() {
        let truth = (-2.0, 2.5);
        let meas = ranges_from(truth, &CORNERS);
        let (x, y) = solve((3.0, -3.0), &meas).unwrap();
        assert!((x - truth.0).abs() < 1e-5 && (y - truth.1).abs() < 1e-5);
    }

    #[test]
    fn fewer_than_three_ranges_rejected() {
        let meas = ranges_from((0.0, 0.0), &CORNERS[..2]);
        assert!(solve((0.0, 0.0), &meas).is_none());
    }

    #[test]
    fn collinear_landmarks_degenerate_from_on_line_guess() {
        // with the prediction on the landmark line the normal matrix is
        // singular and the solver refuses rather than picking a mirror side
        let line = [(-3.0, 0.0), (0.0, 0.0), (3.0, 0.0)];
        let meas = ranges_from((1.0, 2.0), &line);
        assert!(solve((1.0, 0.0), &meas).is_none());
    }

    #[test]
    fn noisy_ranges_give_small_error() {
        let truth = (0.5, 1.5);
        let mut meas = ranges_from(truth, &CORNERS);
        for (i, m) in meas.iter_mut().enumerate() {
            m.range += if i % 2 == 0 { 0.02 } else { -0.02 };
        }
        let (x, y) = solve((0.0, 0.0), &meas).unwrap();
        let err = ((x - truth.0).powi(2) + (y - truth.1).powi(2)).sqrt();
        assert!(err < 0.1, "err {err}");
    }
}
