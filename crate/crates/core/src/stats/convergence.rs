use crate::circle::distance;
use crate::landscape::CriticalLandscape;

/// One recorded sample `(t, x, u)`.
pub type PathPoint = (f64, f64, f64);

/// The trap `x*` the path has settled on, if any: over the trailing
/// `window` every sample is within `eps` of `x*` and `u` moves strictly in
/// the direction of `F(x*)` from sample to sample.
pub fn detect_convergence(path: &[PathPoint], landscape: &CriticalLandscape, window: f64, eps: f64) -> Option<f64> {
    let (t_end, _, _) = *path.last()?;
    let from = path.partition_point(|s| s.0 < t_end - window);
    let tail = &path[from..];
    if tail.len() < 2 {
        return None;
    }
    landscape.traps().into_iter().find(|&trap| {
        let sign = landscape.point_at(trap).map_or(0.0, |c| c.value.signum());
        tail.iter().all(|s| distance(s.1, trap) < eps) && tail.windows(2).all(|w| sign * (w[1].2 - w[0].2) > 0.0)
    })
}
