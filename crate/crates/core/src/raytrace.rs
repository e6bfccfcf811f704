//! Incoherent image-method ray sum for a straight street canyon.
//!
//! The canyon is two vertical dielectric walls at lateral positions 0 and
//! `street_width_m` plus an optional ground plane. Wall images are built by
//! repeated mirroring, each bounce order contributing two image rays; every
//! wall family optionally gets a single ground-bounced twin. Ray powers are
//! `(lambda / 4 pi L)^2` times the product of Fresnel power reflection
//! coefficients over the bounces, and the total is the plain (incoherent)
//! power sum.
//!
//! Path lengths are full 3D lengths including the BS/UE height difference.

use crate::error::{Error, Result};
use crate::propagation::{wavelength_m, DEFAULT_FREQUENCY_HZ};

/// Geometry of a straight canyon link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanyonGeometry {
    pub street_width_m: f64,
    /// Relative dielectric constant of walls and ground (concrete ~ 5).
    pub wall_rel_permittivity: f64,
    pub bs_height_m: f64,
    pub ue_height_m: f64,
    /// Lateral position of the BS across the street, in [0, width].
    pub bs_lateral_offset_m: f64,
    pub ue_lateral_offset_m: f64,
    pub max_wall_reflections: u32,
    pub include_ground: bool,
}

impl Default for CanyonGeometry {
    /// The roof-edge comparison geometry: 30 m street, BS 18 m, UE 1.5 m,
    /// concrete walls, up to 10 wall bounces plus ground, both terminals at
    /// quarter-width lateral offsets.
    fn default() -> Self {
        CanyonGeometry {
            street_width_m: 30.0,
            wall_rel_permittivity: 5.0,
            bs_height_m: 18.0,
            ue_height_m: 1.5,
            bs_lateral_offset_m: 7.5,
            ue_lateral_offset_m: 7.5,
            max_wall_reflections: 10,
            include_ground: true,
        }
    }
}

impl CanyonGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.street_width_m > 0.0) {
            return Err(Error::config("canyon width must be positive"));
        }
        if !(self.wall_rel_permittivity > 1.0) {
            return Err(Error::config("wall permittivity must exceed 1"));
        }
        if !(self.bs_height_m > 0.0) || !(self.ue_height_m > 0.0) {
            return Err(Error::config("terminal heights must be positive"));
        }
        for (name, off) in [
            ("bs_lateral_offset_m", self.bs_lateral_offset_m),
            ("ue_lateral_offset_m", self.ue_lateral_offset_m),
        ] {
            if !(0.0..=self.street_width_m).contains(&off) {
                return Err(Error::config(format!(
                    "{name} = {off} outside [0, {}]",
                    self.street_width_m
                )));
            }
        }
        if self.max_wall_reflections > 64 {
            return Err(Error::config("max_wall_reflections > 64 is not supported"));
        }
        Ok(())
    }
}

/// Surface a reflection happens on. A vertically polarized field is
/// perpendicular (TE) to the plane of incidence at the vertical walls and
/// parallel (TM) at the ground.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Surface {
    Wall,
    Ground,
}

/// Fresnel power reflection coefficient |Gamma|^2 for a vertically
/// polarized wave hitting `surface` at `incidence_angle_rad` from the
/// surface normal, air to dielectric `eps_r`.
pub fn fresnel_reflection_vpol(
    incidence_angle_rad: f64,
    eps_r: f64,
    surface: Surface,
) -> Result<f64> {
    if !(0.0..std::f64::consts::FRAC_PI_2).contains(&incidence_angle_rad) {
        return Err(Error::domain(format!(
            "incidence angle {incidence_angle_rad} rad outside [0, pi/2)"
        )));
    }
    if !(eps_r > 1.0) {
        return Err(Error::domain(format!("eps_r {eps_r} must exceed 1")));
    }
    let cos_i = incidence_angle_rad.cos();
    Ok(fresnel_power(cos_i, eps_r, surface))
}

fn fresnel_power(cos_i: f64, eps_r: f64, surface: Surface) -> f64 {
    let sin2 = (1.0 - cos_i * cos_i).max(0.0);
    let root = (eps_r - sin2).sqrt();
    let gamma = match surface {
        Surface::Wall => (cos_i - root) / (cos_i + root),
        Surface::Ground => (eps_r * cos_i - root) / (eps_r * cos_i + root),
    };
    gamma * gamma
}

/// One image ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayContribution {
    pub wall_bounce_count: u32,
    pub ground_bounce: bool,
    pub path_length_m: f64,
    pub power_gain_linear: f64,
}

/// Enumerate the direct ray, every wall-image ray up to the configured
/// bounce order, and (when enabled) the ground-bounced twin of each.
pub fn enumerate_rays(geometry: &CanyonGeometry, range_m: f64) -> Result<Vec<RayContribution>> {
    geometry.validate()?;
    if !(range_m >= 1.0) {
        return Err(Error::domain(format!("range {range_m} m below 1 m")));
    }
    let lambda = wavelength_m(DEFAULT_FREQUENCY_HZ);
    let w = geometry.street_width_m;
    let eps = geometry.wall_rel_permittivity;

    // Wall-image lateral positions: two mirror chains, one starting at the
    // near wall (y = 0), one at the far wall (y = w).
    let mut images: Vec<(f64, u32)> = vec![(geometry.bs_lateral_offset_m, 0)];
    for first_wall in [0.0, w] {
        let mut y = geometry.bs_lateral_offset_m;
        for bounce in 1..=geometry.max_wall_reflections {
            let mirror = if (bounce % 2 == 1) == (first_wall == 0.0) {
                0.0
            } else {
                w
            };
            y = 2.0 * mirror - y;
            images.push((y, bounce));
        }
    }

    let mut rays = Vec::with_capacity(images.len() * 2);
    for (y_img, bounces) in images {
        let dy = y_img - geometry.ue_lateral_offset_m;
        let ground_flags: &[bool] = if geometry.include_ground {
            &[false, true]
        } else {
            &[false]
        };
        for &ground in ground_flags {
            let dz = if ground {
                geometry.bs_height_m + geometry.ue_height_m
            } else {
                geometry.bs_height_m - geometry.ue_height_m
            };
            let length = (range_m * range_m + dy * dy + dz * dz).sqrt();
            let mut power = (lambda / (4.0 * std::f64::consts::PI * length)).powi(2);
            if bounces > 0 {
                // Parallel walls: every bounce of one image ray shares the
                // same incidence angle to the wall normal.
                let cos_wall = dy.abs() / length;
                power *= fresnel_power(cos_wall, eps, Surface::Wall).powi(bounces as i32);
            }
            if ground {
                let cos_ground = dz / length;
                power *= fresnel_power(cos_ground, eps, Surface::Ground);
            }
            rays.push(RayContribution {
                wall_bounce_count: bounces,
                ground_bounce: ground,
                path_length_m: length,
                power_gain_linear: power,
            });
        }
    }
    Ok(rays)
}

/// Incoherent ray-sum path gain in dB at horizontal range `range_m`.
pub fn incoherent_path_gain(geometry: &CanyonGeometry, range_m: f64) -> Result<f64> {
    let total: f64 = enumerate_rays(geometry, range_m)?
        .iter()
        .map(|r| r.power_gain_linear)
        .sum();
    Ok(10.0 * total.log10())
}
