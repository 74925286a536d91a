//! Python bindings for the cube-map motion model.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use cubemc_core::eval::{run_eval, EvalConfig};
use cubemc_core::frame::SyntheticSpec;
use cubemc_core::geom;
use cubemc_core::interp::{generate_dctif_bank, PHASES};
use cubemc_core::motion;
use cubemc_core::search;
use cubemc_core::{Block, Error, MotionVector, UnfoldPoint};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn point(p: (f64, f64)) -> UnfoldPoint {
    UnfoldPoint::new(p.0, p.1)
}

/// 4x3 cube-map layout with square faces.
#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct CubeLayout {
    inner: cubemc_core::CubeLayout,
}

#[pymethods]
impl CubeLayout {
    #[new]
    fn new(face_size: usize) -> PyResult<Self> {
        Ok(CubeLayout {
            inner: cubemc_core::CubeLayout::square(face_size).map_err(to_py)?,
        })
    }

    #[getter]
    fn face_size(&self) -> usize {
        self.inner.face_width()
    }

    #[getter]
    fn canvas_size(&self) -> (usize, usize) {
        (self.inner.canvas_width(), self.inner.canvas_height())
    }

    #[getter]
    fn radius(&self) -> f64 {
        self.inner.radius()
    }

    /// Face name at an unfold position, or None in the corner holes.
    fn face_of(&self, x: f64, y: f64) -> Option<&'static str> {
        geom::face_of(UnfoldPoint::new(x, y), &self.inner).map(|f| f.name())
    }

    fn unfold_to_sphere(&self, x: f64, y: f64) -> PyResult<(f64, f64, f64)> {
        let s = geom::unfold_to_sphere(UnfoldPoint::new(x, y), &self.inner).map_err(to_py)?;
        Ok((s.x, s.y, s.z))
    }

    /// Returns `(face, x, y)`.
    fn sphere_to_unfold(&self, x: f64, y: f64, z: f64) -> PyResult<(&'static str, f64, f64)> {
        let (f, p) = geom::sphere_to_unfold(geom::SpherePoint::new(x, y, z), &self.inner).map_err(to_py)?;
        Ok((f.name(), p.x, p.y))
    }

    fn __repr__(&self) -> String {
        format!("CubeLayout(face_size={})", self.inner.face_width())
    }
}

/// Reference position of `u2` when the block center `u0` moves to `u1`.
#[pyfunction]
fn transport_point(layout: &CubeLayout, u0: (f64, f64), u1: (f64, f64), u2: (f64, f64)) -> PyResult<(f64, f64)> {
    let p = motion::transport_point(point(u0), point(u1), point(u2), &layout.inner).map_err(to_py)?;
    Ok((p.x, p.y))
}

/// Neighbor MV (quarter-pel) carried over to the current block center.
#[pyfunction]
fn transport_mv_predictor(layout: &CubeLayout, nb_center: (f64, f64), nb_mv: (i32, i32), cur_center: (f64, f64)) -> (i32, i32) {
    let mv = motion::transport_mv_predictor(point(nb_center), MotionVector::new(nb_mv.0, nb_mv.1), point(cur_center), &layout.inner);
    (mv.dx, mv.dy)
}

/// Per-pixel reference positions in 1/64 pel as `(rx, ry)` row-major lists.
#[pyfunction]
fn build_correspondence_field(
    layout: &CubeLayout,
    block: (usize, usize, usize, usize),
    mv: (i32, i32),
) -> PyResult<(Vec<i32>, Vec<i32>)> {
    let b = Block::new(block.0, block.1, block.2, block.3);
    let f = motion::build_correspondence_field(&b, MotionVector::new(mv.0, mv.1), &layout.inner).map_err(to_py)?;
    Ok((f.rx, f.ry))
}

/// The 64-phase interpolation filter bank as a list of 8-tap lists.
#[pyfunction]
fn dctif_bank() -> Vec<Vec<i16>> {
    let bank = generate_dctif_bank();
    (0..PHASES).map(|p| bank.phase(p).to_vec()).collect()
}

#[pyfunction]
fn scale_mv(mv: (i32, i32), d_target: i32, d_neighbor: i32) -> PyResult<(i32, i32)> {
    let s = search::scale_mv(MotionVector::new(mv.0, mv.1), d_target, d_neighbor).map_err(to_py)?;
    Ok((s.dx, s.dy))
}

/// Runs the translational vs. advanced comparison on a synthetic sequence and
/// returns the summary as a dict.
#[pyfunction]
#[pyo3(signature = (velocity, face_size=64, frames=4, seed=1, block_size=16, ref_distance=1))]
fn run_synthetic_eval<'py>(
    py: Python<'py>,
    velocity: (f64, f64, f64),
    face_size: usize,
    frames: usize,
    seed: u64,
    block_size: usize,
    ref_distance: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let spec = SyntheticSpec::new(face_size, frames, [velocity.0, velocity.1, velocity.2], seed);
    let config = EvalConfig::synthetic(spec, block_size, ref_distance);
    let report = py.detach(|| run_eval(&config)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("frames", report.frames.len())?;
    d.set_item("blocks", report.block_count())?;
    d.set_item("mean_psnr_delta", report.mean_psnr_delta().to_vec())?;
    d.set_item("advanced_fraction", report.advanced_fraction())?;
    d.set_item("total_cost_trans", report.total_cost_trans())?;
    d.set_item("total_cost_adv", report.total_cost_adv())?;
    Ok(d)
}

#[pymodule]
fn cubemc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<CubeLayout>()?;
    m.add_function(wrap_pyfunction!(transport_point, m)?)?;
    m.add_function(wrap_pyfunction!(transport_mv_predictor, m)?)?;
    m.add_function(wrap_pyfunction!(build_correspondence_field, m)?)?;
    m.add_function(wrap_pyfunction!(dctif_bank, m)?)?;
    m.add_function(wrap_pyfunction!(scale_mv, m)?)?;
    m.add_function(wrap_pyfunction!(run_synthetic_eval, m)?)?;
    Ok(())
}
