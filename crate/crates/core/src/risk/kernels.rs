//! Closed-form risk kernels for a falling aircraft.

use core::f64::consts::PI;

use super::{AngleMode, FallParams, RiskError, UavCollisionParams};
use crate::math;
use crate::scene::RoadCell;

/// Shielding coefficients at or below this are treated as "no shelter" and
/// use the step limit of the fatality curve.
pub const SHIELDING_EPS: f64 = 1e-6;

/// Crash footprint area `pi d^2 / 4`.
pub fn crash_area(p: &FallParams) -> f64 {
    PI * p.diameter * p.diameter / 4.0
}

fn drag_factor(p: &FallParams) -> f64 {
    p.drag_coefficient * p.air_density * crash_area(p)
}

/// Speed reached after a quadratic-drag fall from rest through `h`.
pub fn terminal_velocity(p: &FallParams) -> f64 {
    math::sqrt(2.0 * p.total_mass() * p.gravity / drag_factor(p))
}

/// Ground-contact speed after falling `h_drop` metres with quadratic air drag.
pub fn impact_velocity(h_drop: f64, p: &FallParams) -> f64 {
    if h_drop <= 0.0 {
        return 0.0;
    }
    let k = drag_factor(p);
    let m = p.total_mass();
    math::sqrt(2.0 * m * p.gravity / k * (1.0 - math::exp(-h_drop * k / m)))
}

/// Kinetic energy at impact.
pub fn impact_energy(v: f64, p: &FallParams) -> f64 {
    0.5 * p.total_mass() * v * v
}

/// Probability that an impact with energy `energy` kills an exposed person
/// under shelter factor `shielding`.
pub fn fatality_probability(energy: f64, shielding: f64, p: &FallParams) -> Result<f64, RiskError> {
    if energy.is_nan() || energy < 0.0 {
        return Err(RiskError::Domain { what: "impact energy", value: energy });
    }
    if !(0.0..=1.0).contains(&shielding) {
        return Err(RiskError::Domain { what: "shielding coefficient", value: shielding });
    }
    let root = math::sqrt(p.alpha / p.beta);
    if shielding <= SHIELDING_EPS {
        // exponent 1/(4 c_s) -> infinity: step at the fatality threshold
        return Ok(if energy > p.beta {
            1.0
        } else if energy < p.beta {
            0.0
        } else {
            1.0 / (1.0 + root)
        });
    }
    if energy == 0.0 {
        return Ok(0.0);
    }
    if energy == f64::INFINITY {
        return Ok(1.0);
    }
    let tail = math::powf(p.beta / energy, 1.0 / (4.0 * shielding));
    Ok(1.0 / (1.0 + root * tail))
}

/// Expected fatalities per hour on the ground below a cell.
pub fn personnel_risk(h_drop: f64, population_density: f64, shielding: f64, p: &FallParams) -> Result<f64, RiskError> {
    if population_density == 0.0 || p.failure_rate == 0.0 {
        return Ok(0.0);
    }
    let exposed = population_density * crash_area(p);
    let energy = impact_energy(impact_velocity(h_drop, p), p);
    Ok(p.failure_rate * exposed * fatality_probability(energy, shielding, p)?)
}

/// Share of road surface covered by vehicles: `S_v rho_V / w_r`.
pub fn vehicle_hit_probability(vehicle_area: f64, road: &RoadCell) -> f64 {
    vehicle_area * road.traffic_density / road.width
}

/// Vehicle risk of a column; zero off-road.
pub fn vehicle_risk(road: Option<&RoadCell>, vehicle_area: f64, failure_rate: f64) -> f64 {
    match road {
        None => 0.0,
        Some(r) => failure_rate * (r.traffic_density * r.length) * vehicle_hit_probability(vehicle_area, r),
    }
}

/// Relative speed of aircraft and UAV for one geometry.
///
/// `theta` and `gamma` are the elevation angles of the two velocity vectors,
/// `epsilon` the horizontal angle between them.
pub fn relative_speed(v_e: f64, v_u: f64, theta: f64, gamma: f64, epsilon: f64) -> f64 {
    let mixed = math::cos(theta) * math::cos(gamma) * math::cos(epsilon) - math::sin(theta) * math::sin(gamma);
    math::sqrt((v_e * v_e + v_u * v_u + 2.0 * v_e * v_u * mixed).max(0.0))
}

/// Mean relative speed between the aircraft and a UAV with uniformly
/// distributed heading.
///
/// In fixed mode the configured angles and the mid-range aircraft speed are
/// used. In integrated mode the speed is averaged over aircraft speed,
/// UAV elevation and heading by composite midpoint quadrature; the integrand
/// does not depend on time so the time average is exact.
pub fn mean_relative_velocity(u: &UavCollisionParams) -> Result<f64, RiskError> {
    let v = match u.angles {
        AngleMode::Fixed { theta, gamma, epsilon } => {
            relative_speed(0.5 * (u.speed_min + u.speed_max), u.uav_speed, theta, gamma, epsilon)
        }
        AngleMode::Integrated { theta, nodes } => {
            if nodes == 0 {
                return Err(RiskError::Numerical("quadrature needs at least one node per axis"));
            }
            let n = nodes as usize;
            let hv = (u.speed_max - u.speed_min) / n as f64;
            let hg = PI / n as f64;
            let he = PI / n as f64;
            let mut sum = 0.0;
            for a in 0..n {
                let v_e = u.speed_min + (a as f64 + 0.5) * hv;
                for b in 0..n {
                    let gamma = -PI / 2.0 + (b as f64 + 0.5) * hg;
                    for c in 0..n {
                        let eps = (c as f64 + 0.5) * he;
                        sum += relative_speed(v_e, u.uav_speed, theta, gamma, eps);
                    }
                }
            }
            sum / (n * n * n) as f64
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(RiskError::Numerical("mean relative velocity is not finite"))
    }
}

/// Volume swept by the collision box: `e_w e_h (v_r t + e_l)`.
pub fn swept_volume(u: &UavCollisionParams, mean_relative_velocity: f64, exposure_time: f64) -> f64 {
    u.box_width * u.box_height * (mean_relative_velocity * exposure_time + u.box_length)
}

/// UAV collision risk for a given exposure time.
pub fn uav_risk(u: &UavCollisionParams, uav_density: f64, failure_rate: f64, exposure_time: f64) -> Result<f64, RiskError> {
    if uav_density == 0.0 {
        return Ok(0.0);
    }
    let v_r = mean_relative_velocity(u)?;
    Ok(failure_rate * uav_density * swept_volume(u, v_r, exposure_time))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::risk::{ExposureTime, UavCollisionParams};

    fn table_params() -> FallParams {
        FallParams::default()
    }

    /// Explicit RK4 integration of `dv/dt = g - k v^2 / (2m)`, `dh/dt = v`,
    /// stepped until the fallen distance reaches `h`.
    fn ode_impact_velocity(h: f64, p: &FallParams) -> f64 {
        let k = p.drag_coefficient * p.air_density * PI * p.diameter * p.diameter / 4.0;
        let m = p.empty_mass + p.passenger_mass;
        let acc = |v: f64| p.gravity - k * v * v / (2.0 * m);
        let (mut v, mut s) = (0.0f64, 0.0f64);
        let dt = 1e-3;
        loop {
            let k1v = acc(v);
            let k1s = v;
            let k2v = acc(v + 0.5 * dt * k1v);
            let k2s = v + 0.5 * dt * k1v;
            let k3v = acc(v + 0.5 * dt * k2v);
            let k3s = v + 0.5 * dt * k2v;
            let k4v = acc(v + dt * k3v);
            let k4s = v + dt * k3v;
            let nv = v + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            let ns = s + dt / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s);
            if ns >= h {
                // linear interpolation inside the last step
                let f = (h - s) / (ns - s);
                return v + f * (nv - v);
            }
            v = nv;
            s = ns;
        }
    }

    #[test]
    fn impact_velocity_matches_ode() {
        let p = table_params();
        for h in [10.0, 50.0, 148.2, 500.0] {
            let closed = impact_velocity(h, &p);
            let ode = ode_impact_velocity(h, &p);
            assert!((closed - ode).abs() / ode < 1e-3, "h={h}: {closed} vs {ode}");
        }
        assert_eq!(impact_velocity(0.0, &p), 0.0);
        let vt = terminal_velocity(&p);
        assert!((impact_velocity(1e5, &p) - vt).abs() < 1e-9);
    }

    #[test]
    fn table_chain_values() {
        let p = table_params();
        let v = impact_velocity(148.2, &p);
        assert!((v - 32.74).abs() < 0.01, "{v}");
        let e = impact_energy(v, &p);
        assert!((e - 3.3235e5).abs() / 3.3235e5 < 5e-3, "{e}");
        let prob = fatality_probability(e, 0.5, &p).unwrap();
        assert!((prob - 0.3657).abs() / 0.3657 < 5e-3, "{prob}");
        let exposed = 2.5e-4 * crash_area(&p);
        assert!((exposed - 7.07e-3).abs() < 1e-5);
        let r = personnel_risk(148.2, 2.5e-4, 0.5, &p).unwrap();
        assert!((r - 1.56e-7).abs() / 1.56e-7 < 5e-3, "{r}");
    }

    #[test]
    fn energy_scaling() {
        let p = table_params();
        assert_eq!(impact_energy(0.0, &p), 0.0);
        assert!((impact_energy(20.0, &p) / impact_energy(10.0, &p) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn fatality_limits_and_domain() {
        let p = table_params();
        assert_eq!(fatality_probability(1e6, 0.0, &p).unwrap(), 1.0);
        assert_eq!(fatality_probability(100.0, 0.0, &p).unwrap(), 0.0);
        let at_beta = fatality_probability(p.beta, 0.0, &p).unwrap();
        assert!((at_beta - 1.0 / (1.0 + (p.alpha / p.beta).sqrt())).abs() < 1e-15);
        assert_eq!(fatality_probability(0.0, 0.5, &p).unwrap(), 0.0);
        assert!(fatality_probability(1e30, 0.75, &p).unwrap() > 0.99);
        assert_eq!(fatality_probability(f64::INFINITY, 0.75, &p).unwrap(), 1.0);
        assert!(fatality_probability(-1.0, 0.5, &p).is_err());
        assert!(fatality_probability(1.0, -0.5, &p).is_err());
        assert!(fatality_probability(f64::NAN, 0.5, &p).is_err());
    }

    #[test]
    fn fatality_is_monotone_in_energy() {
        let p = table_params();
        for cs in [0.25, 0.5, 0.75, 1.0] {
            let mut prev = 0.0;
            for n in 0..200 {
                let e = 10f64.powf(n as f64 / 20.0);
                let pr = fatality_probability(e, cs, &p).unwrap();
                assert!((0.0..=1.0).contains(&pr));
                assert!(pr >= prev);
                prev = pr;
            }
        }
    }

    #[test]
    fn vehicle_examples() {
        let road = RoadCell { traffic_density: 0.07, width: 3.5, length: 50.0 };
        assert!((vehicle_hit_probability(9.68, &road) - 0.1936).abs() < 1e-12);
        assert_eq!(vehicle_risk(None, 9.68, 6.04e-5), 0.0);
        let quiet = RoadCell { traffic_density: 0.0, ..road };
        assert_eq!(vehicle_risk(Some(&quiet), 9.68, 6.04e-5), 0.0);
        let r = vehicle_risk(Some(&road), 9.68, 6.04e-5);
        assert!((r - 6.04e-5 * 3.5 * 0.1936).abs() < 1e-15);
    }

    fn uav() -> UavCollisionParams {
        UavCollisionParams { exposure: ExposureTime::Seconds(2.0), ..UavCollisionParams::default() }
    }

    #[test]
    fn relative_velocity_cases() {
        // UAV at rest: the mean of the aircraft speed range
        let u = UavCollisionParams { uav_speed: 0.0, ..uav() };
        let mid = 0.5 * (u.speed_min + u.speed_max);
        assert!((mean_relative_velocity(&u).unwrap() - mid).abs() < 1e-12);
        let ui = UavCollisionParams { angles: AngleMode::Integrated { theta: 0.3, nodes: 16 }, ..u };
        assert!((mean_relative_velocity(&ui).unwrap() - mid).abs() < 1e-9);
        // head-on, same speed
        assert!(relative_speed(6.0, 6.0, 0.0, 0.0, PI) < 1e-7);
    }

    #[test]
    fn integrated_quadrature_converges() {
        let base = UavCollisionParams { angles: AngleMode::Integrated { theta: PI / 6.0, nodes: 16 }, ..uav() };
        let fine = UavCollisionParams { angles: AngleMode::Integrated { theta: PI / 6.0, nodes: 64 }, ..uav() };
        let a = mean_relative_velocity(&base).unwrap();
        let b = mean_relative_velocity(&fine).unwrap();
        assert!((a - b).abs() / b < 5e-3, "{a} vs {b}");
        let mut prev_gap = f64::INFINITY;
        let mut prev = mean_relative_velocity(&UavCollisionParams {
            angles: AngleMode::Integrated { theta: PI / 6.0, nodes: 4 },
            ..uav()
        })
        .unwrap();
        for n in [8u32, 16, 32, 64] {
            let cur = mean_relative_velocity(&UavCollisionParams {
                angles: AngleMode::Integrated { theta: PI / 6.0, nodes: n },
                ..uav()
            })
            .unwrap();
            let gap = (cur - prev).abs();
            assert!(gap <= prev_gap + 1e-12);
            prev_gap = gap;
            prev = cur;
        }
        assert!(prev_gap < 1e-3);
    }

    #[test]
    fn uav_risk_examples() {
        let u = uav();
        assert_eq!(uav_risk(&u, 0.0, 6.04e-5, 2.0).unwrap(), 0.0);
        let v0 = swept_volume(&u, 0.0, 2.0);
        assert!((v0 - 5.63 * 5.63 * 1.855).abs() < 1e-9);
        assert!((v0 - 58.8).abs() < 0.05);
        let vr = mean_relative_velocity(&u).unwrap();
        let step = swept_volume(&u, vr, 4.0) - swept_volume(&u, vr, 2.0);
        assert!((step - u.box_width * u.box_height * vr * 2.0).abs() < 1e-9);
    }
}
