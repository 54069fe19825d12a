//! Synthetic complex phantoms: superpositions of ellipses (ellipsoids in 3D)
//! under a smooth quadratic phase, plus 1D test lines.

use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::image::{multi_index, ComplexImage};

type C64 = Complex<f64>;

/// Ellipse in normalized coordinates, where every axis spans `[-1, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ellipse {
    pub center: Vec<f64>,
    pub semi_axes: Vec<f64>,
    /// Rotation in the `(x, y)` plane, radians.
    pub rotation: f64,
    pub amplitude: C64,
}

/// Phase `c0 + cx x + cy y + cxx x² + cyy y² + cxy x y` in normalized coordinates.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QuadraticPhase {
    pub c0: f64,
    pub cx: f64,
    pub cy: f64,
    pub cxx: f64,
    pub cyy: f64,
    pub cxy: f64,
}

impl QuadraticPhase {
    pub fn at(&self, x: f64, y: f64) -> f64 {
        self.c0 + self.cx * x + self.cy * y + self.cxx * x * x + self.cyy * y * y + self.cxy * x * y
    }
}

/// Multiplicative `1 + amplitude·u`, `u ~ U(-1, 1)` per pixel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Texture {
    pub amplitude: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhantomSpec {
    pub dims: Vec<usize>,
    pub ellipses: Vec<Ellipse>,
    pub phase: QuadraticPhase,
    pub texture: Option<Texture>,
}

impl PhantomSpec {
    pub fn empty(dims: &[usize]) -> Self {
        Self {
            dims: dims.to_vec(),
            ellipses: Vec::new(),
            phase: QuadraticPhase::default(),
            texture: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dims.len();
        if !(1..=3).contains(&d) || self.dims.contains(&0) {
            return Err(Error::invalid(format!(
                "phantom grid must be 1D to 3D, got {:?}",
                self.dims
            )));
        }
        for (k, e) in self.ellipses.iter().enumerate() {
            let ok = e.center.len() == d
                && e.semi_axes.len() == d
                && e.center.iter().all(|c| c.is_finite() && c.abs() <= 1.0)
                && e.semi_axes.iter().all(|a| a.is_finite() && *a > 0.0)
                && e.rotation.is_finite()
                && e.amplitude.re.is_finite()
                && e.amplitude.im.is_finite();
            if !ok {
                return Err(Error::invalid(format!(
                    "ellipse {k} is malformed or outside the field of view"
                )));
            }
        }
        Ok(())
    }
}

/// Normalized coordinate of sample `i` of `n`: `(i - n/2) / (n/2)`.
fn coordinate(i: usize, n: usize) -> f64 {
    if n == 1 {
        0.0
    } else {
        (i as f64 - n as f64 / 2.0) / (n as f64 / 2.0)
    }
}

fn inside(e: &Ellipse, point: &[f64]) -> bool {
    let (s, c) = e.rotation.sin_cos();
    let mut rel: Vec<f64> = point.iter().zip(&e.center).map(|(p, c)| p - c).collect();
    if rel.len() >= 2 {
        let (x, y) = (rel[0], rel[1]);
        rel[0] = c * x + s * y;
        rel[1] = -s * x + c * y;
    }
    rel.iter()
        .zip(&e.semi_axes)
        .map(|(r, a)| (r / a).powi(2))
        .sum::<f64>()
        <= 1.0
}

pub fn make_phantom(spec: &PhantomSpec) -> Result<ComplexImage<f64>> {
    spec.validate()?;
    let dims = &spec.dims;
    let len: usize = dims.iter().product();
    let mut rng = spec.texture.map(|t| ChaCha8Rng::seed_from_u64(t.seed));
    let data = (0..len)
        .map(|flat| {
            let point: Vec<f64> = multi_index(dims, flat)
                .iter()
                .zip(dims)
                .map(|(&i, &n)| coordinate(i, n))
                .collect();
            let value: C64 = spec
                .ellipses
                .iter()
                .filter(|e| inside(e, &point))
                .map(|e| e.amplitude)
                .sum();
            let grain = match (&mut rng, spec.texture) {
                (Some(r), Some(t)) => 1.0 + t.amplitude * r.random_range(-1.0..1.0),
                _ => 1.0,
            };
            let (x, y) = (point[0], point.get(1).copied().unwrap_or(0.0));
            value * grain * C64::from_polar(1.0, spec.phase.at(x, y))
        })
        .collect();
    ComplexImage::new(dims.clone(), data)
}

/// Row `row` (fixed index along axis 0) of a 2D image.
pub fn make_test_line(image: &ComplexImage<f64>, row: usize) -> Result<Vec<C64>> {
    let [rows, cols] = image.dims() else {
        return Err(Error::invalid(format!(
            "test lines come from 2D images, got {:?}",
            image.dims()
        )));
    };
    if row >= *rows {
        return Err(Error::invalid(format!("row {row} outside 0..{rows}")));
    }
    Ok(image.data()[row * cols..(row + 1) * cols].to_vec())
}

/// Writes `line` back into row `row`.
pub fn insert_test_line(image: &mut ComplexImage<f64>, row: usize, line: &[C64]) -> Result<()> {
    let cols = image.dims().get(1).copied().unwrap_or(0);
    if image.ndim() != 2 || row >= image.dims()[0] || line.len() != cols {
        return Err(Error::invalid("line does not fit the image"));
    }
    image.data_mut()[row * cols..(row + 1) * cols].copy_from_slice(line);
    Ok(())
}

/// Modified Shepp–Logan intensities: `(A, a, b, x0, y0, φ in degrees)`.
const SHEPP_2D: [(f64, f64, f64, f64, f64, f64); 10] = [
    (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    (-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0),
    (-0.2, 0.11, 0.31, 0.22, 0.0, -18.0),
    (-0.2, 0.16, 0.41, -0.22, 0.0, 18.0),
    (0.1, 0.21, 0.25, 0.0, 0.35, 0.0),
    (0.1, 0.046, 0.046, 0.0, 0.1, 0.0),
    (0.1, 0.046, 0.046, 0.0, -0.1, 0.0),
    (0.1, 0.046, 0.023, -0.08, -0.605, 0.0),
    (0.1, 0.023, 0.023, 0.0, -0.606, 0.0),
    (0.1, 0.023, 0.046, 0.06, -0.605, 0.0),
];

/// Extent along z and z center of each 2D ellipse in the 3D variant.
const SHEPP_3D_Z: [(f64, f64); 10] = [
    (0.81, 0.0),
    (0.78, 0.0),
    (0.22, 0.0),
    (0.28, 0.0),
    (0.41, -0.15),
    (0.05, 0.25),
    (0.05, 0.25),
    (0.05, 0.0),
    (0.02, 0.0),
    (0.02, 0.0),
];

/// Smooth phase used by the presets.
pub const DEFAULT_PHASE: QuadraticPhase = QuadraticPhase {
    c0: 0.0,
    cx: 0.3 * PI,
    cy: -0.2 * PI,
    cxx: 0.5 * PI,
    cyy: -0.4 * PI,
    cxy: 0.3 * PI,
};

pub fn shepp_logan_2d(dims: [usize; 2]) -> PhantomSpec {
    let ellipses = SHEPP_2D
        .iter()
        .map(|&(a, sa, sb, x0, y0, phi)| Ellipse {
            center: vec![x0, y0],
            semi_axes: vec![sa, sb],
            rotation: phi.to_radians(),
            amplitude: C64::new(a, 0.0),
        })
        .collect();
    PhantomSpec {
        dims: dims.to_vec(),
        ellipses,
        phase: DEFAULT_PHASE,
        texture: None,
    }
}

pub fn shepp_logan_3d(dims: [usize; 3]) -> PhantomSpec {
    let ellipses = SHEPP_2D
        .iter()
        .zip(SHEPP_3D_Z)
        .map(|(&(a, sa, sb, x0, y0, phi), (sc, z0))| Ellipse {
            center: vec![x0, y0, z0],
            semi_axes: vec![sa, sb, sc],
            rotation: phi.to_radians(),
            amplitude: C64::new(a, 0.0),
        })
        .collect();
    PhantomSpec {
        dims: dims.to_vec(),
        ellipses,
        phase: DEFAULT_PHASE,
        texture: None,
    }
}

/// Row used for the 1D test line of the 256×256 2D phantom.
pub const TEST_LINE_ROW: usize = 128;

/// The 256-sample test line.
pub fn line256() -> Result<Vec<C64>> {
    make_test_line(&make_phantom(&shepp_logan_2d([256, 256]))?, TEST_LINE_ROW)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Shepp2d,
    Shepp3d,
    Line256,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "shepp2d" => Ok(Preset::Shepp2d),
            "shepp3d" => Ok(Preset::Shepp3d),
            "line256" => Ok(Preset::Line256),
            other => Err(Error::invalid(format!("unknown preset '{other}'"))),
        }
    }
}

impl Preset {
    pub fn default_grid(self) -> Vec<usize> {
        match self {
            Preset::Shepp2d => vec![128, 128],
            Preset::Shepp3d => vec![64, 64, 64],
            Preset::Line256 => vec![256],
        }
    }

    /// Renders the preset; `grid` overrides the default sizes.
    pub fn render(self, grid: Option<&[usize]>) -> Result<ComplexImage<f64>> {
        let dims = grid
            .map(<[usize]>::to_vec)
            .unwrap_or_else(|| self.default_grid());
        match (self, dims.as_slice()) {
            (Preset::Shepp2d, &[x, y]) => make_phantom(&shepp_logan_2d([x, y])),
            (Preset::Shepp3d, &[x, y, z]) => make_phantom(&shepp_logan_3d([x, y, z])),
            (Preset::Line256, &[n]) => {
                let image = make_phantom(&shepp_logan_2d([n, n]))?;
                ComplexImage::new(vec![n], make_test_line(&image, n / 2)?)
            }
            _ => Err(Error::invalid(format!(
                "grid {dims:?} does not suit preset {self:?}"
            ))),
        }
    }
}
