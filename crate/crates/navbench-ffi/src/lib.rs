//! C ABI for the navbench core: generate or parse worlds, build configs,
//! run episodes, and read the results — all through opaque handles.
//!
//! Conventions:
//! - Constructors return an owned pointer (null on failure) or fill an
//!   out-parameter and return a [`NavbenchStatus`].
//! - Every object has exactly one matching `_free`; freeing null is a no-op.
//! - Strings returned by this library are UTF-8, NUL-terminated, and owned
//!   by the caller, who must release them with [`navbench_string_free`].
//! - No call ever unwinds across the boundary; internal panics surface as
//!   `NAVBENCH_STATUS_INTERNAL` (or null from pointer constructors).

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use navbench::bench::START;
use navbench::config::RootConfig;
use navbench::geometry::RobotState;
use navbench::pipeline::{
    default_time_budget, run_episode, Outcome, PerceptionMode, PipelineConfig, RunRecord,
};
use navbench::planning::{PlannerConfig, PlannerMode};
use navbench::sim::{Difficulty, World};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NavbenchStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument was out of range or a config failed validation.
    InvalidArgument = 2,
    /// Text input (RON world, TOML config) failed to parse.
    Parse = 3,
    /// An index was past the end of the collection.
    OutOfRange = 4,
    /// The operation panicked internally; the output is untouched.
    Internal = 5,
}

/// How an episode ended.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NavbenchOutcome {
    Success = 0,
    Timeout = 1,
    Collision = 2,
    PlannerAbort = 3,
}

impl From<Outcome> for NavbenchOutcome {
    fn from(o: Outcome) -> Self {
        match o {
            Outcome::Success => NavbenchOutcome::Success,
            Outcome::Timeout => NavbenchOutcome::Timeout,
            Outcome::Collision => NavbenchOutcome::Collision,
            Outcome::PlannerAbort => NavbenchOutcome::PlannerAbort,
        }
    }
}

/// Opaque scenario world handle.
pub struct NavbenchWorld {
    inner: World,
}

/// Opaque pipeline configuration handle.
pub struct NavbenchConfig {
    inner: PipelineConfig,
}

/// Opaque episode result handle.
pub struct NavbenchRecord {
    inner: RunRecord,
}

fn difficulty_from(raw: u32) -> Option<Difficulty> {
    match raw {
        0 => Some(Difficulty::Easy),
        1 => Some(Difficulty::Medium),
        2 => Some(Difficulty::Hard),
        _ => None,
    }
}

fn mode_from(raw: u32) -> Option<PerceptionMode> {
    match raw {
        0 => Some(PerceptionMode::Lidar),
        1 => Some(PerceptionMode::Mono),
        _ => None,
    }
}

/// Generate the scenario world for a difficulty tier and seed.
///
/// `difficulty`: 0 = easy, 1 = medium, 2 = hard. Returns null for any other
/// value. Free with [`navbench_world_free`].
#[no_mangle]
pub extern "C" fn navbench_world_generate(difficulty: u32, seed: u64) -> *mut NavbenchWorld {
    let Some(d) = difficulty_from(difficulty) else {
        return std::ptr::null_mut();
    };
    catch_unwind(|| navbench::sim::generate_world(d, seed)).map_or(std::ptr::null_mut(), |w| {
        Box::into_raw(Box::new(NavbenchWorld { inner: w }))
    })
}

/// The fixed grass-corridor world (the one feasible route passes tall
/// grass). Free with [`navbench_world_free`].
#[no_mangle]
pub extern "C" fn navbench_world_corridor() -> *mut NavbenchWorld {
    Box::into_raw(Box::new(NavbenchWorld {
        inner: navbench::bench::corridor_world(),
    }))
}

/// Parse a world from RON text.
///
/// # Safety
/// `text` must be a valid NUL-terminated string; `out` must be a valid
/// pointer. On `Ok`, `*out` owns the world and must be released with
/// [`navbench_world_free`]; on any error `*out` is untouched.
#[no_mangle]
pub unsafe extern "C" fn navbench_world_parse_ron(
    text: *const c_char,
    out: *mut *mut NavbenchWorld,
) -> NavbenchStatus {
    if text.is_null() || out.is_null() {
        return NavbenchStatus::NullPointer;
    }
    let Ok(text) = CStr::from_ptr(text).to_str() else {
        return NavbenchStatus::Parse;
    };
    match ron::from_str::<World>(text) {
        Ok(world) => {
            *out = Box::into_raw(Box::new(NavbenchWorld { inner: world }));
            NavbenchStatus::Ok
        }
        Err(_) => NavbenchStatus::Parse,
    }
}

/// Serialize a world to RON. Returns null if `world` is null; otherwise a
/// string owned by the caller (release with [`navbench_string_free`]).
///
/// # Safety
/// `world` must be a live handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn navbench_world_to_ron(world: *const NavbenchWorld) -> *mut c_char {
    let Some(world) = world.as_ref() else {
        return std::ptr::null_mut();
    };
    let Ok(text) = ron::ser::to_string_pretty(&world.inner, ron::ser::PrettyConfig::default())
    else {
        return std::ptr::null_mut();
    };
    CString::new(text).map_or(std::ptr::null_mut(), CString::into_raw)
}

/// Release a world handle. Null is a no-op.
///
/// # Safety
/// `world` must be a handle from this library, not yet freed, or null.
#[no_mangle]
pub unsafe extern "C" fn navbench_world_free(world: *mut NavbenchWorld) {
    if !world.is_null() {
        drop(Box::from_raw(world));
    }
}

/// Default pipeline config for a sensor mode (0 = lidar, 1 = mono).
/// Returns null for any other value. Free with [`navbench_config_free`].
#[no_mangle]
pub extern "C" fn navbench_config_default(mode: u32) -> *mut NavbenchConfig {
    mode_from(mode).map_or(std::ptr::null_mut(), |m| {
        Box::into_raw(Box::new(NavbenchConfig {
            inner: PipelineConfig::for_mode(m),
        }))
    })
}

/// Default config with a bundled planner preset applied.
///
/// `mode`: 0 = lidar, 1 = mono. `preset`: 0 = real-params, 1 = sim-tuned.
/// Returns null for out-of-range values. Free with [`navbench_config_free`].
#[no_mangle]
pub extern "C" fn navbench_config_preset(mode: u32, preset: u32) -> *mut NavbenchConfig {
    let Some(m) = mode_from(mode) else {
        return std::ptr::null_mut();
    };
    let preset = match preset {
        0 => PlannerMode::RealParams,
        1 => PlannerMode::SimTuned,
        _ => return std::ptr::null_mut(),
    };
    let mut cfg = PipelineConfig::for_mode(m);
    cfg.planner = PlannerConfig::preset(preset);
    Box::into_raw(Box::new(NavbenchConfig { inner: cfg }))
}

/// Parse a TOML config (same schema as the CLI's `--config` files) and
/// resolve it against the built-in defaults.
///
/// # Safety
/// `text` must be a valid NUL-terminated string; `out` must be a valid
/// pointer. On `Ok`, `*out` owns the config and must be released with
/// [`navbench_config_free`]; on any error `*out` is untouched.
#[no_mangle]
pub unsafe extern "C" fn navbench_config_parse_toml(
    text: *const c_char,
    out: *mut *mut NavbenchConfig,
) -> NavbenchStatus {
    if text.is_null() || out.is_null() {
        return NavbenchStatus::NullPointer;
    }
    let Ok(text) = CStr::from_ptr(text).to_str() else {
        return NavbenchStatus::Parse;
    };
    let root = match RootConfig::from_toml(text, std::path::Path::new("<ffi>")) {
        Ok(root) => root,
        Err(_) => return NavbenchStatus::Parse,
    };
    match root.resolve(None) {
        Ok(cfg) => {
            *out = Box::into_raw(Box::new(NavbenchConfig { inner: cfg }));
            NavbenchStatus::Ok
        }
        Err(_) => NavbenchStatus::InvalidArgument,
    }
}

/// Release a config handle. Null is a no-op.
///
/// # Safety
/// `config` must be a handle from this library, not yet freed, or null.
#[no_mangle]
pub unsafe extern "C" fn navbench_config_free(config: *mut NavbenchConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Run one navigation episode from (0, 0) toward `(goal_x, goal_y)` with
/// the standard wall-clock budget, and hand back its record.
///
/// # Safety
/// `world` and `config` must be live handles; `out` must be a valid
/// pointer. On `Ok`, `*out` owns the record and must be released with
/// [`navbench_record_free`]; on any error `*out` is untouched.
#[no_mangle]
pub unsafe extern "C" fn navbench_run_episode(
    world: *const NavbenchWorld,
    config: *const NavbenchConfig,
    goal_x: f64,
    goal_y: f64,
    seed: u64,
    out: *mut *mut NavbenchRecord,
) -> NavbenchStatus {
    let (Some(world), Some(config)) = (world.as_ref(), config.as_ref()) else {
        return NavbenchStatus::NullPointer;
    };
    if out.is_null() {
        return NavbenchStatus::NullPointer;
    }
    if config.inner.validate().is_err() {
        return NavbenchStatus::InvalidArgument;
    }
    let budget = default_time_budget(START, (goal_x, goal_y), config.inner.planner.v_max);
    let record = catch_unwind(AssertUnwindSafe(|| {
        run_episode(
            &world.inner,
            RobotState::at(START.0, START.1, 0.0),
            (goal_x, goal_y),
            &config.inner,
            seed,
            budget,
        )
    }));
    match record {
        Ok(record) => {
            *out = Box::into_raw(Box::new(NavbenchRecord { inner: record }));
            NavbenchStatus::Ok
        }
        Err(_) => NavbenchStatus::Internal,
    }
}

/// Read how the episode ended.
///
/// # Safety
/// `record` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn navbench_record_outcome(
    record: *const NavbenchRecord,
    out: *mut NavbenchOutcome,
) -> NavbenchStatus {
    let Some(record) = record.as_ref() else {
        return NavbenchStatus::NullPointer;
    };
    if out.is_null() {
        return NavbenchStatus::NullPointer;
    }
    *out = record.inner.outcome.into();
    NavbenchStatus::Ok
}

/// Read the driven path length in metres.
///
/// # Safety
/// `record` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn navbench_record_path_length(
    record: *const NavbenchRecord,
    out: *mut f64,
) -> NavbenchStatus {
    let Some(record) = record.as_ref() else {
        return NavbenchStatus::NullPointer;
    };
    if out.is_null() {
        return NavbenchStatus::NullPointer;
    }
    *out = record.inner.path_length;
    NavbenchStatus::Ok
}

/// Number of (t, pose) samples in the record's trajectory.
///
/// # Safety
/// `record` must be a live handle or null (null reads as 0).
#[no_mangle]
pub unsafe extern "C" fn navbench_record_trajectory_len(record: *const NavbenchRecord) -> usize {
    record.as_ref().map_or(0, |r| r.inner.trajectory.len())
}

/// Read one trajectory sample. Any of the value pointers may be null to
/// skip that field.
///
/// # Safety
/// `record` must be a live handle; non-null value pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn navbench_record_trajectory_at(
    record: *const NavbenchRecord,
    index: usize,
    t: *mut f64,
    x: *mut f64,
    y: *mut f64,
    theta: *mut f64,
) -> NavbenchStatus {
    let Some(record) = record.as_ref() else {
        return NavbenchStatus::NullPointer;
    };
    let Some(&(st, ref s)) = record.inner.trajectory.get(index) else {
        return NavbenchStatus::OutOfRange;
    };
    if !t.is_null() {
        *t = st;
    }
    if !x.is_null() {
        *x = s.x;
    }
    if !y.is_null() {
        *y = s.y;
    }
    if !theta.is_null() {
        *theta = s.theta;
    }
    NavbenchStatus::Ok
}

/// Serialize the whole record (outcome, path length, trajectory) as JSON.
/// Returns null if `record` is null; otherwise a string owned by the
/// caller (release with [`navbench_string_free`]).
///
/// # Safety
/// `record` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn navbench_record_to_json(record: *const NavbenchRecord) -> *mut c_char {
    let Some(record) = record.as_ref() else {
        return std::ptr::null_mut();
    };
    let Ok(json) = serde_json::to_string(&record.inner) else {
        return std::ptr::null_mut();
    };
    CString::new(json).map_or(std::ptr::null_mut(), CString::into_raw)
}

/// Release a record handle. Null is a no-op.
///
/// # Safety
/// `record` must be a handle from this library, not yet freed, or null.
#[no_mangle]
pub unsafe extern "C" fn navbench_record_free(record: *mut NavbenchRecord) {
    if !record.is_null() {
        drop(Box::from_raw(record));
    }
}

/// Release a string returned by this library. Null is a no-op.
///
/// # Safety
/// `s` must be a string returned by this library, not yet freed, or null.
#[no_mangle]
pub unsafe extern "C" fn navbench_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    /// Small-camera mono config so the episode test stays quick.
    const QUICK_TOML: &str = r#"
mode = "mono"

[camera]
width = 160
height = 120
"#;

    #[test]
    fn world_generate_and_ron_round_trip() {
        let w = navbench_world_generate(1, 7);
        assert!(!w.is_null());
        unsafe {
            let text = navbench_world_to_ron(w);
            assert!(!text.is_null());
            let mut back: *mut NavbenchWorld = ptr::null_mut();
            assert_eq!(
                navbench_world_parse_ron(text, &mut back),
                NavbenchStatus::Ok
            );
            assert_eq!((*back).inner, (*w).inner);
            navbench_string_free(text);
            navbench_world_free(back);
            navbench_world_free(w);
        }
    }

    #[test]
    fn invalid_enums_yield_null() {
        assert!(navbench_world_generate(3, 0).is_null());
        assert!(navbench_config_default(2).is_null());
        assert!(navbench_config_preset(0, 9).is_null());
    }

    #[test]
    fn null_arguments_are_reported_not_dereferenced() {
        unsafe {
            let mut out: *mut NavbenchWorld = ptr::null_mut();
            assert_eq!(
                navbench_world_parse_ron(ptr::null(), &mut out),
                NavbenchStatus::NullPointer
            );
            assert!(navbench_world_to_ron(ptr::null()).is_null());
            assert_eq!(navbench_record_trajectory_len(ptr::null()), 0);
            let mut rec: *mut NavbenchRecord = ptr::null_mut();
            assert_eq!(
                navbench_run_episode(ptr::null(), ptr::null(), 10.0, 0.0, 1, &mut rec),
                NavbenchStatus::NullPointer
            );
            // Frees tolerate null.
            navbench_world_free(ptr::null_mut());
            navbench_config_free(ptr::null_mut());
            navbench_record_free(ptr::null_mut());
            navbench_string_free(ptr::null_mut());
        }
    }

    #[test]
    fn garbage_ron_is_a_parse_error() {
        let text = CString::new("(not a world").unwrap();
        unsafe {
            let mut out: *mut NavbenchWorld = ptr::null_mut();
            assert_eq!(
                navbench_world_parse_ron(text.as_ptr(), &mut out),
                NavbenchStatus::Parse
            );
            assert!(out.is_null());
        }
    }

    #[test]
    fn toml_config_bad_values_are_invalid_not_parse_errors() {
        unsafe {
            let mut out: *mut NavbenchConfig = ptr::null_mut();
            let bad_syntax = CString::new("alpha = [").unwrap();
            assert_eq!(
                navbench_config_parse_toml(bad_syntax.as_ptr(), &mut out),
                NavbenchStatus::Parse
            );
            let bad_value = CString::new("alpha = 1.5").unwrap();
            assert_eq!(
                navbench_config_parse_toml(bad_value.as_ptr(), &mut out),
                NavbenchStatus::InvalidArgument
            );
        }
    }

    #[test]
    fn episode_runs_end_to_end_and_exports_json() {
        let world = navbench_world_generate(0, 5);
        assert!(!world.is_null());
        unsafe {
            let toml = CString::new(QUICK_TOML).unwrap();
            let mut config: *mut NavbenchConfig = ptr::null_mut();
            assert_eq!(
                navbench_config_parse_toml(toml.as_ptr(), &mut config),
                NavbenchStatus::Ok
            );

            let mut record: *mut NavbenchRecord = ptr::null_mut();
            assert_eq!(
                navbench_run_episode(world, config, 10.0, 0.0, 1, &mut record),
                NavbenchStatus::Ok
            );

            let mut outcome = NavbenchOutcome::Timeout;
            assert_eq!(
                navbench_record_outcome(record, &mut outcome),
                NavbenchStatus::Ok
            );
            let mut length = 0.0;
            assert_eq!(
                navbench_record_path_length(record, &mut length),
                NavbenchStatus::Ok
            );
            let n = navbench_record_trajectory_len(record);
            assert!(n >= 2);
            let (mut t, mut x) = (0.0, 0.0);
            assert_eq!(
                navbench_record_trajectory_at(record, n - 1, &mut t, &mut x, ptr::null_mut(), ptr::null_mut()),
                NavbenchStatus::Ok
            );
            assert!(t > 0.0);
            assert_eq!(
                navbench_record_trajectory_at(record, n, ptr::null_mut(), ptr::null_mut(), ptr::null_mut(), ptr::null_mut()),
                NavbenchStatus::OutOfRange
            );

            let json = navbench_record_to_json(record);
            assert!(!json.is_null());
            let parsed: serde_json::Value =
                serde_json::from_str(CStr::from_ptr(json).to_str().unwrap()).unwrap();
            assert!(parsed.get("outcome").is_some());
            assert!(parsed.get("path_length").is_some());

            navbench_string_free(json);
            navbench_record_free(record);
            navbench_config_free(config);
            navbench_world_free(world);
        }
    }

    #[test]
    fn generated_header_covers_the_api() {
        let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("include")
            .join("navbench.h");
        let text = std::fs::read_to_string(header).expect("cbindgen header");
        for name in [
            "navbench_world_generate",
            "navbench_run_episode",
            "navbench_record_to_json",
            "navbench_string_free",
            "NAVBENCH_H",
        ] {
            assert!(text.contains(name), "header missing {name}");
        }
    }
}
