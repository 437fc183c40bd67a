use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::{EskfError, FilterParams, ImuSample};

pub const MIN_CALIBRATION_SECONDS: f64 = 10.0;
const MAX_JITTER: f64 = 0.1;

/// Biases and white-noise densities recovered from a motionless IMU log.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StaticCalibration {
    pub accel_bias: Vector3<f64>,
    pub gyro_bias: Vector3<f64>,
    /// Per-axis accelerometer noise density, m/s^2/sqrt(Hz).
    pub accel_noise_density: Vector3<f64>,
    /// Per-axis gyroscope noise density, rad/s/sqrt(Hz).
    pub gyro_noise_density: Vector3<f64>,
    /// Per-axis standard error of the bias estimates.
    pub accel_bias_std_error: Vector3<f64>,
    pub gyro_bias_std_error: Vector3<f64>,
    pub sample_period: f64,
    pub samples: usize,
}

impl StaticCalibration {
    /// Copies biases and the axis-RMS noise densities into `params`.
    pub fn apply_to(&self, params: &mut FilterParams) {
        let rms = |v: &Vector3<f64>| (v.norm_squared() / 3.0).sqrt();
        params.initial_accel_bias = self.accel_bias;
        params.initial_gyro_bias = self.gyro_bias;
        // Densities must stay positive for the filter to be valid.
        params.accel_noise = rms(&self.accel_noise_density).max(f64::MIN_POSITIVE);
        params.gyro_noise = rms(&self.gyro_noise_density).max(f64::MIN_POSITIVE);
    }
}

/// Estimates IMU biases and noise densities from a log recorded with the
/// device level and motionless.
///
/// The accelerometer bias is the mean specific force minus the gravity
/// reaction `-gravity`; the gyro bias is the mean rate. Densities are the
/// per-axis sample standard deviations scaled by `sqrt(dt)`.
pub fn estimate_static_noise(log: &[ImuSample], gravity: &Vector3<f64>) -> Result<StaticCalibration, EskfError> {
    let duration = match (log.first(), log.last()) {
        (Some(a), Some(b)) if log.len() >= 2 => b.t - a.t,
        _ => 0.0,
    };
    if duration < MIN_CALIBRATION_SECONDS {
        return Err(EskfError::LogTooShort {
            duration,
            required: MIN_CALIBRATION_SECONDS,
        });
    }
    let n = log.len();
    let mean_dt = duration / (n - 1) as f64;
    for w in log.windows(2) {
        let interval = w[1].t - w[0].t;
        if (interval - mean_dt).abs() > MAX_JITTER * mean_dt {
            return Err(EskfError::IrregularSampling {
                interval,
                mean: mean_dt,
            });
        }
    }

    let (accel_mean, accel_std) = mean_and_std(log.iter().map(|s| s.accel), n);
    let (gyro_mean, gyro_std) = mean_and_std(log.iter().map(|s| s.gyro), n);
    let sqrt_dt = mean_dt.sqrt();
    let sqrt_n = (n as f64).sqrt();
    Ok(StaticCalibration {
        accel_bias: accel_mean + gravity,
        gyro_bias: gyro_mean,
        accel_noise_density: accel_std * sqrt_dt,
        gyro_noise_density: gyro_std * sqrt_dt,
        accel_bias_std_error: accel_std / sqrt_n,
        gyro_bias_std_error: gyro_std / sqrt_n,
        sample_period: mean_dt,
        samples: n,
    })
}

fn mean_and_std(values: impl Iterator<Item = Vector3<f64>> + Clone, n: usize) -> (Vector3<f64>, Vector3<f64>) {
    let mean = values.clone().fold(Vector3::zeros(), |acc, v| acc + v) / n as f64;
    let var = values.fold(Vector3::zeros(), |acc: Vector3<f64>, v| {
        let d = v - mean;
        acc + d.component_mul(&d)
    }) / (n - 1) as f64;
    (mean, var.map(f64::sqrt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Noise;

    const G: Vector3<f64> = Vector3::new(0.0, 0.0, -9.81);

    fn static_log(seconds: f64, rate: f64, gyro_density: f64, gyro_bias: Vector3<f64>) -> Vec<ImuSample> {
        let mut noise = Noise::for_stream(3, "static");
        let sigma = gyro_density * rate.sqrt();
        let n = (seconds * rate) as usize;
        (0..=n)
            .map(|k| {
                ImuSample::new(
                    k as f64 / rate,
                    -G + Vector3::new(0.02, -0.01, 0.03),
                    gyro_bias + noise.gaussian3(sigma),
                )
            })
            .collect()
    }

    #[test]
    fn recovers_gyro_density() {
        let log = static_log(60.0, 60.0, 0.01, Vector3::zeros());
        let cal = estimate_static_noise(&log, &G).unwrap();
        for i in 0..3 {
            let rel = (cal.gyro_noise_density[i] - 0.01).abs() / 0.01;
            assert!(rel < 0.15, "axis {i}: {}", cal.gyro_noise_density[i]);
        }
    }

    #[test]
    fn noise_free_log_gives_exact_biases() {
        let bias = Vector3::new(0.001, -0.002, 0.0005);
        let log = static_log(12.0, 60.0, 0.0, bias);
        let cal = estimate_static_noise(&log, &G).unwrap();
        assert!((cal.gyro_bias - bias).norm() < 1e-15);
        assert!((cal.accel_bias - Vector3::new(0.02, -0.01, 0.03)).norm() < 1e-12);
        assert!(cal.gyro_noise_density.norm() < 1e-15);
        assert!(cal.accel_noise_density.norm() < 1e-12);
    }

    #[test]
    fn short_log_rejected() {
        let log = static_log(2.0, 60.0, 0.01, Vector3::zeros());
        assert!(matches!(
            estimate_static_noise(&log, &G),
            Err(EskfError::LogTooShort { .. })
        ));
        assert!(estimate_static_noise(&[], &G).is_err());
    }

    #[test]
    fn jittery_log_rejected() {
        let mut log = static_log(20.0, 60.0, 0.01, Vector3::zeros());
        log[100].t += 0.5 / 60.0;
        assert!(matches!(
            estimate_static_noise(&log, &G),
            Err(EskfError::IrregularSampling { .. })
        ));
    }
}
