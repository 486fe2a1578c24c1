use std::io::Write;

use super::{ConditionalTrajectory, ShotRecord};
use crate::error::Result;
use crate::scalar::Real;

/// Columns `t_ns, re_ar, im_ar, re_ap, im_ap`.
pub fn write_trajectory_csv<T: Real, W: Write>(traj: &ConditionalTrajectory<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t_ns", "re_ar", "im_ar", "re_ap", "im_ap"])?;
    for ((t, r), p) in traj.times_ns.iter().zip(&traj.alpha_r).zip(&traj.alpha_p) {
        w.write_record(&[
            t.to_string(),
            r.re.to_string(),
            r.im.to_string(),
            p.re.to_string(),
            p.im.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `prep, seed, latched_phase, x_measured, decision`.
pub fn write_shots_csv<'a, T: Real, W: Write>(
    shots: impl IntoIterator<Item = &'a ShotRecord<T>>,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["prep", "seed", "latched_phase", "x_measured", "decision"])?;
    for s in shots {
        w.write_record(&[
            s.qubit_prep.prep_label().to_string(),
            s.seed.to_string(),
            s.latched_phase.to_string(),
            s.x_measured.to_string(),
            s.decision.decision_label().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
