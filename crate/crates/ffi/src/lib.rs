//! C interface to the grid, environment-set and sampling parts of `envsynth`.
//!
//! Every function returns an [`EsStatus`]. On failure the message is kept
//! per thread and read back with [`es_last_error_message`]. Objects are
//! opaque handles created by `es_*_new`/`es_*_load` style calls and released
//! with the matching `es_*_free`; passing NULL to a free function is a no-op.
//!
//! Grids are 30×30 and exchanged as 900 bytes in row-major order with row 0
//! at the bottom, the same layout as `OccupancyGrid::to_bitvector`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use envsynth::gan::{sample_environments, GanModel};
use envsynth::sim::is_navigable_grid;
use envsynth::uniform::sample_uniform;
use envsynth::{EnvironmentSet, Error, ErrorClass, OccupancyGrid, SeededRng, GRID_CELLS, GRID_SIZE};

/// Cells in a grid buffer.
pub const ES_GRID_CELLS: usize = 900;
/// Side length of a grid.
pub const ES_GRID_SIZE: usize = 30;

const _: () = assert!(ES_GRID_CELLS == GRID_CELLS && ES_GRID_SIZE == GRID_SIZE);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EsStatus {
    Ok = 0,
    NullArgument = 1,
    Config = 2,
    Data = 3,
    Internal = 4,
    Panic = 5,
    InvalidUtf8 = 6,
}

pub struct EsGrid(OccupancyGrid);

pub struct EsEnvSet(EnvironmentSet);

pub struct EsGanModel(GanModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(EsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e.class() {
            ErrorClass::Config => EsStatus::Config,
            ErrorClass::Data => EsStatus::Data,
            ErrorClass::Internal => EsStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

type FfiResult = Result<(), Failure>;

fn guard(f: impl FnOnce() -> FfiResult) -> EsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EsStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            EsStatus::Panic
        }
    }
}

fn null(name: &str) -> Failure {
    Failure(EsStatus::NullArgument, format!("{name} is NULL"))
}

unsafe fn as_ref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn write_out<T>(out: *mut T, value: T, name: &str) -> FfiResult {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

unsafe fn path_arg(p: *const c_char, name: &str) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(PathBuf::from)
        .map_err(|_| Failure(EsStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn es_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn es_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// All-free grid.
///
/// # Safety
/// `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn es_grid_new_empty(out: *mut *mut EsGrid) -> EsStatus {
    guard(|| write_out(out, boxed(EsGrid(OccupancyGrid::empty())), "out"))
}

/// Grid from `len` (= 900) bytes of 0/1. Start and goal cells are forced free.
///
/// # Safety
/// `cells` must be NULL or point to `len` readable bytes; `out` must be NULL
/// or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn es_grid_from_cells(cells: *const u8, len: usize, out: *mut *mut EsGrid) -> EsStatus {
    guard(|| {
        if cells.is_null() {
            return Err(null("cells"));
        }
        let bits = std::slice::from_raw_parts(cells, len);
        let grid = OccupancyGrid::from_bitvector(bits)?;
        write_out(out, boxed(EsGrid(grid)), "out")
    })
}

/// Copy the 900 cells into `buf`, which holds `len` bytes.
///
/// # Safety
/// `grid` must be NULL or a live handle; `buf` must be NULL or valid for
/// `len` byte writes.
#[no_mangle]
pub unsafe extern "C" fn es_grid_cells(grid: *const EsGrid, buf: *mut u8, len: usize) -> EsStatus {
    guard(|| {
        let g = as_ref(grid, "grid")?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let bits = g.0.to_bitvector();
        if len < bits.len() {
            return Err(Failure(EsStatus::Data, format!("buffer holds {len} bytes, grid needs {}", bits.len())));
        }
        std::ptr::copy_nonoverlapping(bits.as_ptr(), buf, bits.len());
        Ok(())
    })
}

/// Occupancy of cell (`col`, `row`), 0 or 1.
///
/// # Safety
/// `grid` must be NULL or a live handle; `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn es_grid_get(grid: *const EsGrid, col: usize, row: usize, out: *mut u8) -> EsStatus {
    guard(|| {
        let g = as_ref(grid, "grid")?;
        if col >= GRID_SIZE || row >= GRID_SIZE {
            return Err(Failure(EsStatus::Data, format!("cell ({col}, {row}) is outside the grid")));
        }
        write_out(out, g.0.get(col, row), "out")
    })
}

/// Number of cells where `a` and `b` differ.
///
/// # Safety
/// `a` and `b` must be NULL or live handles; `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn es_grid_hamming(a: *const EsGrid, b: *const EsGrid, out: *mut usize) -> EsStatus {
    guard(|| {
        let (a, b) = (as_ref(a, "a")?, as_ref(b, "b")?);
        write_out(out, a.0.hamming(&b.0), "out")
    })
}

/// Whether an 8-connected free path joins the start and goal cells.
///
/// # Safety
/// `grid` must be NULL or a live handle; `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn es_grid_is_navigable(grid: *const EsGrid, out: *mut bool) -> EsStatus {
    guard(|| write_out(out, is_navigable_grid(&as_ref(grid, "grid")?.0), "out"))
}

/// # Safety
/// `grid` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn es_grid_free(grid: *mut EsGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Load an environment-set directory written by the pipeline.
///
/// # Safety
/// `dir` must be NULL or a NUL-terminated string; `out` must be NULL or
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn es_envset_load(dir: *const c_char, out: *mut *mut EsEnvSet) -> EsStatus {
    guard(|| {
        let dir = path_arg(dir, "dir")?;
        let set = EnvironmentSet::load(&dir)?;
        write_out(out, boxed(EsEnvSet(set)), "out")
    })
}

/// Write `set` to `dir` in the pipeline's on-disk layout.
///
/// # Safety
/// `set` must be NULL or a live handle; `dir` must be NULL or a
/// NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn es_envset_save(set: *const EsEnvSet, dir: *const c_char) -> EsStatus {
    guard(|| {
        let set = as_ref(set, "set")?;
        let dir = path_arg(dir, "dir")?;
        set.0.save(&dir)?;
        Ok(())
    })
}

/// # Safety
/// `set` must be NULL or a live handle; `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn es_envset_len(set: *const EsEnvSet, out: *mut usize) -> EsStatus {
    guard(|| write_out(out, as_ref(set, "set")?.0.len(), "out"))
}

/// Copy of the grid at `index`; free it with `es_grid_free`.
///
/// # Safety
/// `set` must be NULL or a live handle; `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn es_envset_grid(set: *const EsEnvSet, index: usize, out: *mut *mut EsGrid) -> EsStatus {
    guard(|| {
        let set = as_ref(set, "set")?;
        let e = set.0.entries.get(index).ok_or_else(|| {
            Failure(EsStatus::Data, format!("index {index} out of range for a set of {}", set.0.len()))
        })?;
        write_out(out, boxed(EsGrid(e.grid.clone())), "out")
    })
}

/// `count` draws with replacement from `set`.
///
/// # Safety
/// `set` must be NULL or a live handle; `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn es_sample_uniform(
    set: *const EsEnvSet,
    count: usize,
    seed: u64,
    out: *mut *mut EsEnvSet,
) -> EsStatus {
    guard(|| {
        let set = as_ref(set, "set")?;
        let s = sample_uniform(&set.0, count, &mut SeededRng::new(seed))?;
        write_out(out, boxed(EsEnvSet(s)), "out")
    })
}

/// # Safety
/// `set` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn es_envset_free(set: *mut EsEnvSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Load a GAN checkpoint.
///
/// # Safety
/// `path` must be NULL or a NUL-terminated string; `out` must be NULL or
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn es_gan_load(path: *const c_char, out: *mut *mut EsGanModel) -> EsStatus {
    guard(|| {
        let path = path_arg(path, "path")?;
        let model = GanModel::load(&path)?;
        write_out(out, boxed(EsGanModel(model)), "out")
    })
}

/// Draw `count` navigable environments from the generator.
///
/// # Safety
/// `model` must be NULL or a live handle; `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn es_gan_sample(
    model: *const EsGanModel,
    count: usize,
    seed: u64,
    out: *mut *mut EsEnvSet,
) -> EsStatus {
    guard(|| {
        let model = as_ref(model, "model")?;
        let s = sample_environments(&model.0, count, &mut SeededRng::new(seed))?;
        write_out(out, boxed(EsEnvSet(s)), "out")
    })
}

/// # Safety
/// `model` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn es_gan_free(model: *mut EsGanModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}
