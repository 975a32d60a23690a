//! C ABI over the trgeom workbench.
//!
//! Charts and immersions are opaque handles created by the `trgeom_chart_*`
//! and `trgeom_immersion_*` constructors and released with the matching `_free`. Every fallible call
//! returns a [`TrgeomStatus`]; on failure the message is kept per thread and
//! can be copied out with [`trgeom_last_error`]. Complex vectors cross the
//! boundary as interleaved `re, im` doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::Arc;

use trgeom::immersion::{circle, clifford_torus, core_geodesic, Grid, GridImmersion};
use trgeom::kahler::{DeckTransform, KahlerChart};
use trgeom::linearize::operator_ltilde;
use trgeom::maslov::maslov_form;
use trgeom::{CVec, GeomError, C64};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrgeomStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfDomain = 3,
    NotCritical = 4,
    NumericalFailure = 5,
    Config = 6,
    Io = 7,
    Unsupported = 8,
    BufferTooSmall = 9,
    /// A scenario ran but at least one certificate failed.
    CertificateFailed = 10,
    Panic = 11,
}

/// Opaque Kähler chart.
pub struct TrgeomChart(Arc<KahlerChart>);

/// Opaque grid immersion.
pub struct TrgeomImmersion(GridImmersion);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &GeomError) -> TrgeomStatus {
    match e {
        GeomError::DimensionMismatch { .. } | GeomError::InvalidImmersion(_) | GeomError::NotHermitian(_) => {
            TrgeomStatus::InvalidArgument
        }
        GeomError::OutOfDomain | GeomError::LeftDomain => TrgeomStatus::OutOfDomain,
        GeomError::NotCritical { .. } | GeomError::NotExact { .. } => TrgeomStatus::NotCritical,
        GeomError::Config { .. } => TrgeomStatus::Config,
        GeomError::Io(_) => TrgeomStatus::Io,
        GeomError::Unsupported(_) | GeomError::NoEinsteinConstant | GeomError::DerivativeOrderUnavailable { .. } => {
            TrgeomStatus::Unsupported
        }
        GeomError::Task { source, .. } => status_of(source),
        _ => TrgeomStatus::NumericalFailure,
    }
}

/// Run `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (TrgeomStatus, String)>) -> TrgeomStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TrgeomStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside trgeom".into());
            TrgeomStatus::Panic
        }
    }
}

fn geom(e: GeomError) -> (TrgeomStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (TrgeomStatus, String) {
    (TrgeomStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: &str) -> (TrgeomStatus, String) {
    (TrgeomStatus::InvalidArgument, msg.into())
}

/// # Safety
/// `ptr` must be null or valid for `len` reads.
unsafe fn slice<'a, T>(ptr: *const T, len: usize, what: &str) -> Result<&'a [T], (TrgeomStatus, String)> {
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

/// # Safety
/// `ptr` must be null or valid for `len` writes.
unsafe fn slice_mut<'a, T>(ptr: *mut T, len: usize, what: &str) -> Result<&'a mut [T], (TrgeomStatus, String)> {
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(ptr, len))
}

/// # Safety
/// `out` must be null or valid for one write.
unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), (TrgeomStatus, String)> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// # Safety
/// `ptr` must be null or a live handle.
unsafe fn handle<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, (TrgeomStatus, String)> {
    ptr.as_ref().ok_or_else(|| null(what))
}

fn copy_str(s: &str, buf: *mut c_char, len: usize) -> usize {
    let bytes = s.as_bytes();
    if !buf.is_null() && len > 0 {
        let n = bytes.len().min(len - 1);
        // SAFETY: the caller provides `len` writable bytes.
        unsafe {
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
    }
    bytes.len()
}

/// Copy the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len − 1` bytes). Returns the full message length.
///
/// # Safety
/// `buf` must be null or valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn trgeom_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| copy_str(&e.borrow(), buf, len))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn trgeom_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Hex SHA-256 of the convention record (64 bytes plus NUL). Returns the hash length.
///
/// # Safety
/// `buf` must be null or valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn trgeom_convention_hash(buf: *mut c_char, len: usize) -> usize {
    copy_str(&trgeom::conventions::convention_hash(), buf, len)
}

/// Flat `Cⁿ`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn trgeom_chart_flat(n: usize, out: *mut *mut TrgeomChart) -> TrgeomStatus {
    guard(|| {
        if n == 0 {
            return Err(invalid("dimension must be positive"));
        }
        emit(out, TrgeomChart(Arc::new(KahlerChart::flat(n))))
    })
}

/// Affine Fubini–Study chart, `K = c log(1 + |z|²)`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn trgeom_chart_fubini_study(n: usize, c: f64, out: *mut *mut TrgeomChart) -> TrgeomStatus {
    guard(|| {
        if n == 0 || !(c > 0.0) {
            return Err(invalid("need n > 0 and c > 0"));
        }
        emit(out, TrgeomChart(Arc::new(KahlerChart::fubini_study(n, c))))
    })
}

/// Complex hyperbolic ball, `K = −c log(1 − |z|²)`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn trgeom_chart_complex_hyperbolic_ball(n: usize, c: f64, out: *mut *mut TrgeomChart) -> TrgeomStatus {
    guard(|| {
        if n == 0 || !(c > 0.0) {
            return Err(invalid("need n > 0 and c > 0"));
        }
        emit(out, TrgeomChart(Arc::new(KahlerChart::complex_hyperbolic_ball(n, c))))
    })
}

/// Upper half-plane, `K = −c log Im z`; `deck_length > 0` adds the dilation `z ↦ e^ℓ z`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn trgeom_chart_upper_half_plane(c: f64, deck_length: f64, out: *mut *mut TrgeomChart) -> TrgeomStatus {
    guard(|| {
        if !(c > 0.0) {
            return Err(invalid("need c > 0"));
        }
        let mut chart = KahlerChart::upper_half_plane(c);
        if deck_length > 0.0 {
            chart = chart.with_deck(DeckTransform::dilation(deck_length));
        }
        emit(out, TrgeomChart(Arc::new(chart)))
    })
}

/// # Safety
/// `chart` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn trgeom_chart_free(chart: *mut TrgeomChart) {
    if !chart.is_null() {
        drop(Box::from_raw(chart));
    }
}

/// Complex dimension (0 for a null handle).
///
/// # Safety
/// `chart` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn trgeom_chart_dim(chart: *const TrgeomChart) -> usize {
    chart.as_ref().map_or(0, |c| c.0.dim())
}

/// `|ρ̄ − λω̄|` at a point given as `2n` interleaved doubles.
///
/// # Safety
/// `z` must be valid for `2n` reads and `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn trgeom_chart_einstein_defect(chart: *const TrgeomChart, z: *const f64, out: *mut f64) -> TrgeomStatus {
    guard(|| {
        let chart = handle(chart, "chart")?;
        let n = chart.0.dim();
        let z = slice(z, 2 * n, "point")?;
        let p = CVec::from_iterator(n, z.chunks(2).map(|w| C64::new(w[0], w[1])));
        let d = chart.0.einstein_defect(&p).map_err(geom)?;
        *slice_mut(out, 1, "out")?.first_mut().expect("one slot") = d;
        Ok(())
    })
}

/// # Safety
/// `radii` must be valid for `dim(chart)` reads and `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn trgeom_immersion_clifford_torus(
    chart: *const TrgeomChart,
    radii: *const f64,
    nodes: usize,
    out: *mut *mut TrgeomImmersion,
) -> TrgeomStatus {
    guard(|| {
        let chart = handle(chart, "chart")?;
        let radii = slice(radii, chart.0.dim(), "radii")?;
        let imm = clifford_torus(chart.0.clone(), radii, nodes).map_err(geom)?;
        emit(out, TrgeomImmersion(imm))
    })
}

/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn trgeom_immersion_circle(
    chart: *const TrgeomChart,
    center_re: f64,
    center_im: f64,
    radius: f64,
    nodes: usize,
    out: *mut *mut TrgeomImmersion,
) -> TrgeomStatus {
    guard(|| {
        let chart = handle(chart, "chart")?;
        let imm = circle(chart.0.clone(), C64::new(center_re, center_im), radius, nodes).map_err(geom)?;
        emit(out, TrgeomImmersion(imm))
    })
}

/// The closed geodesic `iy`, `y ∈ [1, e^ℓ]`, of a half-plane chart with a deck dilation.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn trgeom_immersion_core_geodesic(
    chart: *const TrgeomChart,
    nodes: usize,
    out: *mut *mut TrgeomImmersion,
) -> TrgeomStatus {
    guard(|| {
        let chart = handle(chart, "chart")?;
        let length = match chart.0.decks().first() {
            Some(DeckTransform::Mobius { a, b, c, .. }) if *b == 0.0 && *c == 0.0 && *a > 1.0 => 2.0 * a.ln(),
            _ => return Err(invalid("chart has no deck dilation")),
        };
        let imm = core_geodesic(chart.0.clone(), 0, length, nodes).map_err(geom)?;
        emit(out, TrgeomImmersion(imm))
    })
}

/// Periodic immersion from node positions: `dims[0..ndim]` grid shape,
/// `points` holds `2·n·Π dims` interleaved doubles in node order.
///
/// # Safety
/// `dims` must be valid for `ndim` reads, `points` for the stated length and
/// `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn trgeom_immersion_from_points(
    chart: *const TrgeomChart,
    dims: *const usize,
    ndim: usize,
    points: *const f64,
    out: *mut *mut TrgeomImmersion,
) -> TrgeomStatus {
    guard(|| {
        let chart = handle(chart, "chart")?;
        let dims = slice(dims, ndim, "dims")?;
        if ndim == 0 || dims.contains(&0) {
            return Err(invalid("grid dimensions must be positive"));
        }
        let n = chart.0.dim();
        let len = Grid::new(dims).len();
        let raw = slice(points, 2 * n * len, "points")?;
        let pts = raw.chunks(2 * n).map(|p| CVec::from_iterator(n, p.chunks(2).map(|w| C64::new(w[0], w[1])))).collect();
        let imm = GridImmersion::new(chart.0.clone(), dims, pts, vec![None; ndim]).map_err(geom)?;
        emit(out, TrgeomImmersion(imm))
    })
}

/// # Safety
/// `imm` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn trgeom_immersion_free(imm: *mut TrgeomImmersion) {
    if !imm.is_null() {
        drop(Box::from_raw(imm));
    }
}

/// Number of grid nodes (0 for a null handle).
///
/// # Safety
/// `imm` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn trgeom_immersion_len(imm: *const TrgeomImmersion) -> usize {
    imm.as_ref().map_or(0, |i| i.0.len())
}

/// Real dimension of the immersed manifold (0 for a null handle).
///
/// # Safety
/// `imm` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn trgeom_immersion_dim(imm: *const TrgeomImmersion) -> usize {
    imm.as_ref().map_or(0, |i| i.0.dim())
}

/// Riemannian and J-volumes.
///
/// # Safety
/// `vol_g` and `vol_j` must be valid for one write each.
#[no_mangle]
pub unsafe extern "C" fn trgeom_immersion_volumes(imm: *const TrgeomImmersion, vol_g: *mut f64, vol_j: *mut f64) -> TrgeomStatus {
    guard(|| {
        let imm = handle(imm, "immersion")?;
        let (g, j) = imm.0.total_volumes();
        slice_mut(vol_g, 1, "vol_g")?[0] = g;
        slice_mut(vol_j, 1, "vol_j")?[0] = j;
        Ok(())
    })
}

/// Maslov form, axis-major (`xi[a·len + node]`), and its sup norm.
///
/// # Safety
/// `xi` must be valid for `xi_len` writes and `sup_norm` for one write (or null).
#[no_mangle]
pub unsafe extern "C" fn trgeom_maslov_form(
    imm: *const TrgeomImmersion,
    xi: *mut f64,
    xi_len: usize,
    sup_norm: *mut f64,
) -> TrgeomStatus {
    guard(|| {
        let imm = handle(imm, "immersion")?;
        let need = imm.0.dim() * imm.0.len();
        if xi_len < need {
            return Err((TrgeomStatus::BufferTooSmall, format!("xi needs {need} doubles")));
        }
        let data = maslov_form(&imm.0).map_err(geom)?;
        slice_mut(xi, need, "xi")?.copy_from_slice(&data.xi.flatten());
        if !sup_norm.is_null() {
            *sup_norm = data.sup_norm;
        }
        Ok(())
    })
}

/// `L̃ f` on a J-minimal immersion; `f` and `out` hold one value per node.
///
/// # Safety
/// `f` and `out` must be valid for `len` reads / writes.
#[no_mangle]
pub unsafe extern "C" fn trgeom_ltilde_apply(imm: *const TrgeomImmersion, f: *const f64, out: *mut f64, len: usize) -> TrgeomStatus {
    guard(|| {
        let imm = handle(imm, "immersion")?;
        if len != imm.0.len() {
            return Err(invalid("field length must equal the node count"));
        }
        let f = slice(f, len, "f")?;
        let y = operator_ltilde(&imm.0).and_then(|op| op.apply(f)).map_err(geom)?;
        slice_mut(out, len, "out")?.copy_from_slice(&y);
        Ok(())
    })
}

/// The `k` smallest resolved eigenvalues of `L̃`, ascending.
///
/// # Safety
/// `out` must be valid for `k` writes.
#[no_mangle]
pub unsafe extern "C" fn trgeom_ltilde_spectrum(imm: *const TrgeomImmersion, k: usize, out: *mut f64) -> TrgeomStatus {
    guard(|| {
        let imm = handle(imm, "immersion")?;
        let vals = operator_ltilde(&imm.0).and_then(|op| op.spectrum(k)).map_err(geom)?;
        if vals.len() < k {
            return Err(invalid("fewer resolved eigenvalues than requested"));
        }
        slice_mut(out, k, "out")?.copy_from_slice(&vals);
        Ok(())
    })
}

/// Run a scenario (config path or bundled name) and write its report into
/// `out_dir`. Returns `CertificateFailed` if it ran but did not certify.
///
/// # Safety
/// `config` and `out_dir` must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn trgeom_run_scenario(config: *const c_char, out_dir: *const c_char) -> TrgeomStatus {
    guard(|| {
        let text = |p: *const c_char, what: &str| -> Result<String, (TrgeomStatus, String)> {
            if p.is_null() {
                return Err(null(what));
            }
            CStr::from_ptr(p).to_str().map(str::to_owned).map_err(|_| invalid("strings must be UTF-8"))
        };
        let config = text(config, "config")?;
        let out_dir = text(out_dir, "out_dir")?;
        let scenario = trgeom::scenario::resolve(&config).map_err(geom)?;
        let outcome = trgeom::scenario::run(&scenario).map_err(geom)?;
        trgeom::scenario::write_report(Path::new(&out_dir), &scenario, &outcome).map_err(geom)?;
        if outcome.pass() {
            Ok(())
        } else {
            Err((TrgeomStatus::CertificateFailed, format!("scenario `{}` failed a certificate", scenario.name)))
        }
    })
}
