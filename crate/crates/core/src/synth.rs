//! Synthetic station data: a desk-scale substitute for real archives.
//!
//! Each generated day is gap-free at minute resolution. GHI follows a
//! clear-sky diurnal curve (Haurwitz) for the configured latitude, modulated
//! by an autocorrelated cloud attenuation process with bistable dynamics —
//! sticky clear skies, sticky overcast, and a volatile broken-sky regime in
//! between. Temperature, humidity, pressure and wind are generated with
//! physically plausible correlations, and sentinel rows can be injected at a
//! configurable rate to exercise cleaning.

use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::ingest::{
    day_file_name, derive_seed, serialize_day_file, Observation, RowLayout, StationDataset,
    StationMeta, Var, SENTINEL, STATIONS,
};

const STEFAN_BOLTZMANN: f64 = 5.670374419e-8;

#[derive(Debug, Clone)]
pub struct SynthOptions {
    pub station_name: String,
    pub latitude: f64,
    pub longitude: f64,
    pub elevation_m: f64,
    pub year: i32,
    /// Julian day of the first generated day.
    pub start_day: u32,
    /// Gap between consecutive generated days, in days.
    pub day_stride: u32,
    /// Probability that a row gets one variable replaced by the sentinel.
    pub sentinel_rate: f64,
    /// Shifts the cloud process toward clear (> 0) or overcast (< 0).
    pub cloud_bias: f64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            station_name: "synthville".to_string(),
            latitude: 40.05,
            longitude: -88.37,
            elevation_m: 213.0,
            year: 2018,
            start_day: 91,
            day_stride: 1,
            sentinel_rate: 0.02,
            cloud_bias: 0.0,
        }
    }
}

/// Solar declination in degrees for a julian day.
fn declination_deg(jday: u32) -> f64 {
    23.45 * (std::f64::consts::TAU * (284.0 + jday as f64) / 365.0).sin()
}

/// Solar zenith angle in degrees, treating local standard time as solar time.
pub fn zenith_deg(latitude_deg: f64, jday: u32, decimal_hours: f64) -> f64 {
    let phi = latitude_deg.to_radians();
    let delta = declination_deg(jday).to_radians();
    let hour_angle = (15.0 * (decimal_hours - 12.0)).to_radians();
    let cos_z = phi.sin() * delta.sin() + phi.cos() * delta.cos() * hour_angle.cos();
    cos_z.clamp(-1.0, 1.0).acos().to_degrees()
}

/// Haurwitz clear-sky GHI in W/m².
pub fn clear_sky_ghi(zenith_deg: f64) -> f64 {
    let cos_z = zenith_deg.to_radians().cos();
    if cos_z <= 0.0 {
        0.0
    } else {
        1098.0 * cos_z * (-0.057 / cos_z).exp()
    }
}

/// Cloud attenuation driven by a slow humidity state. Humidity sets the sky
/// regime through a sharp condensation response: dry skies are steadily
/// clear, saturated skies steadily overcast. In between, cumulus passage
/// makes the attenuation flicker between a cloud-shadow level and a bright
/// gap level (with edge enhancement above one), settling fast after each
/// switch. The humidity state is rendered into the relative-humidity
/// column, so the regime is observable at prediction time.
struct CloudProcess {
    c: f64,
    humidity: f64,
    humidity_day: f64,
    shadow: bool,
}

/// Mean attenuation as a sharp sigmoid in humidity: clear below the
/// condensation band around 0.55, overcast above it.
fn cloud_target(humidity: f64) -> f64 {
    0.15 + 0.82 / (1.0 + ((humidity - 0.55) / 0.055).exp())
}

impl CloudProcess {
    fn new(day_bias: f64, rng: &mut ChaCha8Rng) -> CloudProcess {
        let humidity_day = (0.52 - 0.18 * day_bias.tanh()
            + Normal::new(0.0, 0.12).unwrap().sample(rng))
        .clamp(0.15, 0.85);
        let humidity =
            (humidity_day + Normal::new(0.0, 0.08).unwrap().sample(rng)).clamp(0.0, 1.0);
        let c = (cloud_target(humidity) + Normal::new(0.0, 0.05).unwrap().sample(rng))
            .clamp(0.04, 1.1);
        CloudProcess {
            c,
            humidity,
            humidity_day,
            shadow: rng.gen_bool(0.5),
        }
    }

    fn attenuation(&self) -> f64 {
        self.c
    }

    fn humidity(&self) -> f64 {
        self.humidity
    }

    fn step(&mut self, rng: &mut ChaCha8Rng) {
        self.humidity = (self.humidity
            + 0.004 * (self.humidity_day - self.humidity)
            + Normal::new(0.0, 0.006).unwrap().sample(rng))
        .clamp(0.0, 1.0);

        let mu = cloud_target(self.humidity);
        if (0.30..0.90).contains(&mu) {
            // Broken sky: flicker between shadow and bright-gap levels.
            // Shadow dwell lengthens as the sky gets cloudier. Switches are
            // frequent and settling is gradual, so most broken-sky minutes
            // are transients moving toward one of the two levels.
            let p_to_shadow = 0.30 + 0.25 * (0.9 - mu);
            let p_to_bright = 0.30 + 0.25 * (mu - 0.25);
            let p = if self.shadow { p_to_bright } else { p_to_shadow };
            if rng.gen_range(0.0..1.0) < p {
                self.shadow = !self.shadow;
            }
            let level = if self.shadow {
                0.30 * mu + 0.08
            } else {
                1.02 + 0.12 * (mu - 0.3)
            };
            let noise = Normal::new(0.0, 0.015).unwrap().sample(rng);
            self.c += 0.50 * (level - self.c) + noise;
        } else {
            let noise = Normal::new(0.0, 0.012).unwrap().sample(rng);
            self.c += 0.25 * (mu - self.c) + noise;
        }
        self.c = self.c.clamp(0.03, 1.25);
    }
}

/// Generate `days` gap-free synthetic days with default options.
pub fn gen_synthetic(seed: u64, days: u32) -> StationDataset {
    gen_synthetic_with(seed, days, &SynthOptions::default())
}

/// Generate `days` gap-free synthetic days. Deterministic in `(seed, days,
/// opts)`. Panics if the requested day range runs past the end of the year.
pub fn gen_synthetic_with(seed: u64, days: u32, opts: &SynthOptions) -> StationDataset {
    assert!(days >= 1, "days must be >= 1");
    let last = opts.start_day + (days - 1) * opts.day_stride;
    assert!(last <= 365, "day range runs past the year (last julian day {last})");

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base_pressure = 1013.25 * (-opts.elevation_m / 8431.0).exp();
    let mut pressure_walk = 0.0_f64;
    let mut day_bias = opts.cloud_bias;

    let mut rows = Vec::with_capacity(days as usize * 1440);
    for d in 0..days {
        let jday = opts.start_day + d * opts.day_stride;
        let date = chrono::NaiveDate::from_yo_opt(opts.year, jday).expect("validated above");
        let (month, day) = (chrono::Datelike::month(&date), chrono::Datelike::day(&date));

        // Day-scale states evolve slowly across generated days.
        day_bias = 0.7 * day_bias + 0.3 * opts.cloud_bias
            + Normal::new(0.0, 0.35).unwrap().sample(&mut rng);
        pressure_walk = (0.85 * pressure_walk
            + Normal::new(0.0, 2.0).unwrap().sample(&mut rng))
        .clamp(-9.0, 9.0);
        let season = (std::f64::consts::TAU * (jday as f64 - 105.0) / 365.0).sin();
        let day_mean_temp = 12.0 + 11.0 * season + Normal::new(0.0, 2.0).unwrap().sample(&mut rng);
        let wind_base = 2.0 + rng.gen_range(0.0..4.0);
        let mut wind_dir: f64 = rng.gen_range(0.0..360.0);

        let mut cloud = CloudProcess::new(day_bias, &mut rng);
        let mut temp_noise = 0.0_f64;
        let mut wind_noise = 0.0_f64;

        for m in 0..1440u32 {
            let (hour, minute) = (m / 60, m % 60);
            let dt = hour as f64 + minute as f64 / 60.0;
            let zen = zenith_deg(opts.latitude, jday, dt);
            cloud.step(&mut rng);
            let c = cloud.attenuation();

            let clear = clear_sky_ghi(zen);
            let ghi = clear * c;

            temp_noise = 0.995 * temp_noise + Normal::new(0.0, 0.05).unwrap().sample(&mut rng);
            let diurnal = 5.5 * ((dt - 9.0) / 24.0 * std::f64::consts::TAU).sin();
            let temp = day_mean_temp + diurnal - 2.5 * (1.0 - c) + temp_noise;
            let temp_k = temp + 273.15;

            let rh = (20.0 + 64.0 * cloud.humidity() + 4.0 * (1.0 - c) - 0.3 * diurnal
                + 1.5 * temp_noise)
            .clamp(12.0, 101.0);

            wind_noise = 0.99 * wind_noise + Normal::new(0.0, 0.08).unwrap().sample(&mut rng);
            let windspd = (wind_base + 1.2 * (1.0 - c) + wind_noise
                + 0.8 * ((dt - 6.0) / 24.0 * std::f64::consts::TAU).sin())
            .max(0.1);
            wind_dir = (wind_dir + Normal::new(0.0, 1.5).unwrap().sample(&mut rng))
                .rem_euclid(360.0);

            let pressure = base_pressure + pressure_walk - 0.5 * (dt / 24.0 * std::f64::consts::TAU).sin();

            let diffuse = (ghi * (0.18 + 0.72 * (1.0 - c))).min(ghi);
            let cos_z = zen.to_radians().cos();
            let direct_n = if cos_z > 0.08 {
                ((ghi - diffuse) / cos_z).max(0.0)
            } else {
                0.0
            };
            let uw_solar = 0.22 * ghi;
            let dw_ir = 0.76 * STEFAN_BOLTZMANN * temp_k.powi(4) * (1.0 + 0.20 * (1.0 - c));
            let uw_ir = 0.97 * STEFAN_BOLTZMANN * (temp_k + 1.5).powi(4);
            let uvb = 0.14 * ghi * (0.9 + 0.2 * c);
            let par = 0.44 * ghi;
            let netsolar = ghi - uw_solar;
            let netir = dw_ir - uw_ir;

            let mut obs = Observation::new(
                opts.year,
                jday,
                month,
                day,
                hour,
                minute,
                dt,
                round2(zen),
                [0.0; Var::COUNT],
                [0; Var::COUNT],
            );
            obs.set_value(Var::DwSolar, round1(ghi));
            obs.set_value(Var::UwSolar, round1(uw_solar));
            obs.set_value(Var::DirectN, round1(direct_n));
            obs.set_value(Var::Diffuse, round1(diffuse));
            obs.set_value(Var::DwIr, round1(dw_ir));
            obs.set_value(Var::DwCasetemp, round1(temp_k + 1.0));
            obs.set_value(Var::DwDometemp, round1(temp_k + 2.0));
            obs.set_value(Var::UwIr, round1(uw_ir));
            obs.set_value(Var::UwCasetemp, round1(temp_k + 0.5));
            obs.set_value(Var::UwDometemp, round1(temp_k + 1.5));
            obs.set_value(Var::Uvb, round1(uvb));
            obs.set_value(Var::Par, round1(par));
            obs.set_value(Var::Netsolar, round1(netsolar));
            obs.set_value(Var::Netir, round1(netir));
            obs.set_value(Var::Totalnet, round1(netsolar + netir));
            obs.set_value(Var::Temp, round1(temp));
            obs.set_value(Var::Rh, round1(rh));
            obs.set_value(Var::Windspd, round1(windspd));
            obs.set_value(Var::Winddir, round1(wind_dir));
            obs.set_value(Var::Pressure, round1(pressure));

            if opts.sentinel_rate > 0.0 && rng.gen_range(0.0..1.0) < opts.sentinel_rate {
                const POOL: [Var; 8] = [
                    Var::Temp,
                    Var::Rh,
                    Var::Pressure,
                    Var::Windspd,
                    Var::DwSolar,
                    Var::Par,
                    Var::Uvb,
                    Var::Totalnet,
                ];
                let var = POOL[rng.gen_range(0..POOL.len())];
                obs.set_value(var, SENTINEL);
            }

            rows.push(obs);
        }
    }

    let meta = StationMeta {
        name: opts.station_name.clone(),
        latitude: opts.latitude,
        longitude: opts.longitude,
        elevation_m: opts.elevation_m,
    };
    StationDataset::new(meta, rows).expect("generated minutes are unique")
}

fn round1(v: f64) -> f64 {
    (v * 10.0).round() / 10.0
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

/// First julian day and stride used by [`write_synthetic_archive`]; chosen
/// so generated days always reach into May for plot-data extraction.
pub const ARCHIVE_START_DAY: u32 = 105;
pub const ARCHIVE_DAY_STRIDE: u32 = 5;

fn archive_cloud_bias(station_id: &str) -> f64 {
    match station_id {
        "desertrock" => 0.9,
        "pennstate" => -0.35,
        _ => 0.0,
    }
}

/// Write a synthetic three-station archive under `root`, one SURFRAD-format
/// day file per generated day, laid out as `<station>/<year>/<file>`.
/// Deterministic in `(master_seed, days_per_year, years, sentinel_rate)`.
pub fn write_synthetic_archive(
    root: &Path,
    master_seed: u64,
    days_per_year: u32,
    years: &[i32],
    sentinel_rate: f64,
) -> std::io::Result<Vec<PathBuf>> {
    assert!(
        ARCHIVE_START_DAY + days_per_year.saturating_sub(1) * ARCHIVE_DAY_STRIDE <= 365,
        "at most 53 days per year fit the archive calendar"
    );
    let mut written = Vec::new();
    for info in &STATIONS {
        for &year in years {
            let opts = SynthOptions {
                station_name: info.id.to_string(),
                latitude: info.latitude,
                longitude: info.longitude,
                elevation_m: info.elevation_m,
                year,
                start_day: ARCHIVE_START_DAY,
                day_stride: ARCHIVE_DAY_STRIDE,
                sentinel_rate,
                cloud_bias: archive_cloud_bias(info.id),
            };
            let seed = derive_seed(master_seed, &format!("{}/{year}", info.id));
            let ds = gen_synthetic_with(seed, days_per_year, &opts);
            let dir = root.join(info.id).join(year.to_string());
            std::fs::create_dir_all(&dir)?;

            let mut day_rows: Vec<(u32, Vec<&Observation>)> = Vec::new();
            for obs in ds.rows() {
                match day_rows.last_mut() {
                    Some((jday, rows)) if *jday == obs.jday => rows.push(obs),
                    _ => day_rows.push((obs.jday, vec![obs])),
                }
            }
            for (jday, rows) in day_rows {
                let path = dir.join(day_file_name(info, year, jday));
                let rows_owned: Vec<Observation> = rows.into_iter().cloned().collect();
                std::fs::write(
                    &path,
                    serialize_day_file(&ds.meta, &rows_owned, RowLayout::surfrad()),
                )?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::is_sentinel;
    use crate::preprocess::clean;

    #[test]
    fn two_days_give_2880_rows() {
        let ds = gen_synthetic(1, 2);
        assert_eq!(ds.len(), 2880);
    }

    #[test]
    fn zero_sentinel_rate_means_clean_is_identity() {
        let opts = SynthOptions {
            sentinel_rate: 0.0,
            ..SynthOptions::default()
        };
        let ds = gen_synthetic_with(2, 2, &opts);
        assert_eq!(clean(&ds).unwrap().len(), ds.len());
    }

    #[test]
    fn sentinel_rate_injects_missing_values() {
        let opts = SynthOptions {
            sentinel_rate: 0.1,
            ..SynthOptions::default()
        };
        let ds = gen_synthetic_with(3, 1, &opts);
        let hit = ds
            .rows()
            .iter()
            .filter(|o| Var::ALL.iter().any(|&v| is_sentinel(o.value(v))))
            .count();
        assert!(hit > 50, "only {hit} sentinel rows injected");
        assert!(clean(&ds).unwrap().len() < ds.len());
    }

    #[test]
    fn fixed_seed_reproduces_dataset() {
        let a = gen_synthetic(7, 1);
        let b = gen_synthetic(7, 1);
        assert_eq!(a.rows(), b.rows());
    }

    #[test]
    fn zenith_geometry_is_sane() {
        // Solar noon beats early morning, and night is below the horizon.
        let noon = zenith_deg(40.0, 172, 12.0);
        let morning = zenith_deg(40.0, 172, 7.0);
        let midnight = zenith_deg(40.0, 172, 0.0);
        assert!(noon < morning);
        assert!(midnight > 90.0);
        // Summer-solstice noon zenith at latitude 40N is about 40 - 23.45.
        assert!((noon - 16.55).abs() < 1.5, "noon zenith {noon}");
    }

    #[test]
    fn daytime_ghi_is_positive_and_bounded() {
        let ds = gen_synthetic(4, 2);
        for o in ds.rows() {
            let ghi = o.value(Var::DwSolar);
            if is_sentinel(ghi) {
                continue;
            }
            assert!(ghi >= 0.0);
            assert!(ghi < 1200.0);
            if o.hour >= 10 && o.hour <= 13 {
                assert!(o.zen < 90.0);
            }
        }
    }
}
