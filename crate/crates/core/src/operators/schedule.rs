use crate::error::{Error, Result};
use crate::grid::{discrete_chirp_rate, ChirpSpec, FieldOfView};

/// Physical parameters of a quadratic shim field whose chirp rate grows
/// linearly with readout time, `w(t) = γ κ t / π`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShimReadout {
    /// Quadratic field intensity κ.
    pub kappa: f64,
    /// Echo time (centre of the readout window).
    pub echo_time: f64,
    /// Readout duration Δt.
    pub readout_duration: f64,
    /// Gyromagnetic factor γ.
    pub gamma: f64,
}

impl ShimReadout {
    /// Physical chirp rate at time `t`.
    pub fn rate_at(&self, t: f64) -> f64 {
        self.gamma * self.kappa * t / std::f64::consts::PI
    }

    /// Time of readout sample `m` out of `nz`, sample-centered inside
    /// `[TE - Δt/2, TE + Δt/2]`.
    pub fn sample_time(&self, m: usize, nz: usize) -> f64 {
        self.echo_time - self.readout_duration / 2.0
            + (m as f64 + 0.5) * self.readout_duration / nz as f64
    }
}

/// Per-readout-sample discrete rates `(w̄_x, w̄_y)` with `w_x = +w(t)` and
/// `w_y = -w(t)`. The readout axis is the last grid dimension.
pub fn chirp_rate_schedule(
    shim: &ShimReadout,
    fov: &FieldOfView,
    base: &[usize],
) -> Result<ChirpSpec> {
    if !(shim.readout_duration > 0.0) {
        return Err(Error::invalid(format!(
            "readout duration must be positive, got {}",
            shim.readout_duration
        )));
    }
    if base.len() != 3 || fov.ndim() != 3 {
        return Err(Error::invalid(
            "a readout schedule needs a 3D grid and field of view",
        ));
    }
    let nz = base[2];
    if nz == 0 {
        return Err(Error::invalid("readout grid must have at least one sample"));
    }
    let l = fov.lengths();
    let rates = (0..nz)
        .map(|m| {
            let w = shim.rate_at(shim.sample_time(m, nz));
            Ok((
                discrete_chirp_rate(w, l[0], base[0])?,
                discrete_chirp_rate(-w, l[1], base[1])?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ChirpSpec::ReadoutVarying(rates))
}

/// Schedule growing linearly between `first` and `last` (both `(w̄_x, w̄_y)`)
/// over `nz` readout samples, sample-centered like [`chirp_rate_schedule`].
pub fn linear_schedule(first: (f64, f64), last: (f64, f64), nz: usize) -> ChirpSpec {
    let rates = (0..nz)
        .map(|m| {
            let s = (m as f64 + 0.5) / nz as f64;
            (
                first.0 + s * (last.0 - first.0),
                first.1 + s * (last.1 - first.1),
            )
        })
        .collect();
    ChirpSpec::ReadoutVarying(rates)
}
