//! C ABI over the tgrl engine, hash layer and location probe.
//!
//! All handles are opaque and owned by the caller once returned; free them
//! with the matching `*_free` function. Strings returned through out
//! parameters are heap-allocated and must be released with
//! [`tgrl_string_free`] (or the list/observation free functions). Every
//! fallible call returns a [`TgrlStatus`]; on failure the message is
//! available from [`tgrl_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use tgrl::engine::{games, load_game, load_game_file, Env, GameDef, Observation, Snapshot};
use tgrl::hashrep::{hash_vec, str_hash, HashConfig};
use tgrl::locgraph::{locate, LocationKey};
use tgrl::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TgrlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidGame = 4,
    NotFound = 5,
    Io = 6,
    EnvDone = 7,
    SnapshotMismatch = 8,
    InvalidArgument = 9,
    Panic = 10,
    Internal = 11,
}

/// A loaded game definition.
pub struct TgrlGame(Arc<GameDef>);

/// A running environment.
pub struct TgrlEnv(Env);

/// A saved environment state.
pub struct TgrlSnapshot(Snapshot);

/// Observation triple. Free with [`tgrl_observation_free`].
#[repr(C)]
pub struct TgrlObservation {
    pub response: *mut c_char,
    pub inventory: *mut c_char,
    pub look: *mut c_char,
}

/// Outcome of one step. Free the observation with [`tgrl_observation_free`].
#[repr(C)]
pub struct TgrlStepResult {
    pub observation: TgrlObservation,
    pub reward: i64,
    pub done: bool,
    pub world_changed: bool,
}

/// Owned array of strings. Free with [`tgrl_string_list_free`].
#[repr(C)]
pub struct TgrlStringList {
    pub items: *mut *mut c_char,
    pub len: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(TgrlStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse { .. } | Error::Json(_) => TgrlStatus::Parse,
            Error::Validation(_) => TgrlStatus::InvalidGame,
            Error::EnvDone => TgrlStatus::EnvDone,
            Error::SnapshotMismatch { .. } => TgrlStatus::SnapshotMismatch,
            Error::Io(_) => TgrlStatus::Io,
            Error::Config(_) | Error::Empty(_) | Error::Shape(_) => TgrlStatus::InvalidArgument,
            _ => TgrlStatus::Internal,
        };
        Fail(code, e.to_string())
    }
}

fn fail<T>(code: TgrlStatus, msg: &str) -> Result<T, Fail> {
    Err(Fail(code, msg.to_string()))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> TgrlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            TgrlStatus::Ok
        }
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic".into());
            TgrlStatus::Panic
        }
    }
}

unsafe fn cstr<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return fail(TgrlStatus::NullPointer, &format!("{what} is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .or_else(|_| fail(TgrlStatus::InvalidUtf8, &format!("{what} is not UTF-8")))
}

unsafe fn obj<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail(TgrlStatus::NullPointer, format!("{what} is null")))
}

unsafe fn obj_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| Fail(TgrlStatus::NullPointer, format!("{what} is null")))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return fail(TgrlStatus::NullPointer, "output pointer is null");
    }
    out.write(value);
    Ok(())
}

fn owned(s: &str) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

fn observation(o: &Observation) -> TgrlObservation {
    TgrlObservation {
        response: owned(&o.response),
        inventory: owned(&o.inventory_text),
        look: owned(&o.look_text),
    }
}

/// Error message of the most recent call on this thread, or null if it
/// succeeded. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn tgrl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn tgrl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `o` must be null or point to an observation filled by this library.
#[no_mangle]
pub unsafe extern "C" fn tgrl_observation_free(o: *mut TgrlObservation) {
    if let Some(o) = o.as_mut() {
        for p in [&mut o.response, &mut o.inventory, &mut o.look] {
            tgrl_string_free(*p);
            *p = ptr::null_mut();
        }
    }
}

/// # Safety
/// `list` must be null or point to a list filled by this library.
#[no_mangle]
pub unsafe extern "C" fn tgrl_string_list_free(list: *mut TgrlStringList) {
    if let Some(l) = list.as_mut() {
        if !l.items.is_null() {
            let items = Vec::from_raw_parts(l.items, l.len, l.len);
            for s in items {
                tgrl_string_free(s);
            }
        }
        l.items = ptr::null_mut();
        l.len = 0;
    }
}

unsafe fn give_game(out: *mut *mut TgrlGame, g: GameDef) -> Result<(), Fail> {
    write_out(out, Box::into_raw(Box::new(TgrlGame(Arc::new(g)))))
}

/// Parses a game definition from JSON text.
///
/// # Safety
/// `text` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tgrl_game_from_str(text: *const c_char, out: *mut *mut TgrlGame) -> TgrlStatus {
    guard(|| {
        let text = cstr(text, "text")?;
        give_game(out, load_game(text)?)
    })
}

/// # Safety
/// `path` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tgrl_game_from_file(path: *const c_char, out: *mut *mut TgrlGame) -> TgrlStatus {
    guard(|| {
        let path = cstr(path, "path")?;
        give_game(out, load_game_file(path)?)
    })
}

/// Loads one of the bundled games by name.
///
/// # Safety
/// `name` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tgrl_game_bundled(name: *const c_char, out: *mut *mut TgrlGame) -> TgrlStatus {
    guard(|| {
        let name = cstr(name, "name")?;
        let Some(src) = games::source(name) else {
            return fail(TgrlStatus::NotFound, &format!("no bundled game '{name}'"));
        };
        give_game(out, load_game(src)?)
    })
}

/// # Safety
/// `game` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tgrl_game_free(game: *mut TgrlGame) {
    if !game.is_null() {
        drop(Box::from_raw(game));
    }
}

/// # Safety
/// `game` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tgrl_game_max_score(game: *const TgrlGame, out: *mut i64) -> TgrlStatus {
    guard(|| write_out(out, obj(game, "game")?.0.max_score))
}

/// Creates an environment. The game handle may be freed afterwards.
///
/// # Safety
/// `game` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tgrl_env_new(game: *const TgrlGame, out: *mut *mut TgrlEnv) -> TgrlStatus {
    guard(|| {
        let g = obj(game, "game")?.0.clone();
        write_out(out, Box::into_raw(Box::new(TgrlEnv(Env::new(g)))))
    })
}

/// # Safety
/// `env` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tgrl_env_free(env: *mut TgrlEnv) {
    if !env.is_null() {
        drop(Box::from_raw(env));
    }
}

/// # Safety
/// `env` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tgrl_env_reset(env: *mut TgrlEnv, out: *mut TgrlObservation) -> TgrlStatus {
    guard(|| {
        let env = obj_mut(env, "env")?;
        if out.is_null() {
            return fail(TgrlStatus::NullPointer, "output pointer is null");
        }
        write_out(out, observation(&env.0.reset()))
    })
}

/// # Safety
/// `env` must be a valid handle, `action` a valid C string and `out` a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tgrl_env_step(
    env: *mut TgrlEnv,
    action: *const c_char,
    out: *mut TgrlStepResult,
) -> TgrlStatus {
    guard(|| {
        let env = obj_mut(env, "env")?;
        let action = cstr(action, "action")?;
        if out.is_null() {
            return fail(TgrlStatus::NullPointer, "output pointer is null");
        }
        let r = env.0.step(action)?;
        write_out(
            out,
            TgrlStepResult {
                observation: observation(&r.observation),
                reward: r.reward,
                done: r.done,
                world_changed: r.world_changed,
            },
        )
    })
}

/// # Safety
/// `env` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tgrl_env_valid_actions(env: *mut TgrlEnv, out: *mut TgrlStringList) -> TgrlStatus {
    guard(|| {
        let env = obj_mut(env, "env")?;
        if out.is_null() {
            return fail(TgrlStatus::NullPointer, "output pointer is null");
        }
        let mut items: Vec<*mut c_char> = env.0.valid_actions()?.iter().map(|s| owned(s)).collect();
        items.shrink_to_fit();
        let len = items.len();
        let items = std::mem::ManuallyDrop::new(items).as_mut_ptr();
        write_out(out, TgrlStringList { items, len })
    })
}

/// # Safety
/// `env` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tgrl_env_score(env: *const TgrlEnv, out: *mut i64) -> TgrlStatus {
    guard(|| write_out(out, obj(env, "env")?.0.score()))
}

/// # Safety
/// `env` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tgrl_env_is_done(env: *const TgrlEnv, out: *mut bool) -> TgrlStatus {
    guard(|| write_out(out, obj(env, "env")?.0.is_done()))
}

/// Hash of the full canonical world state.
///
/// # Safety
/// `env` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tgrl_env_state_hash(env: *const TgrlEnv, out: *mut u64) -> TgrlStatus {
    guard(|| write_out(out, obj(env, "env")?.0.gt_state_hash()))
}

/// Id of the room the player is in. Free the string with [`tgrl_string_free`].
///
/// # Safety
/// `env` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tgrl_env_room_id(env: *const TgrlEnv, out: *mut *mut c_char) -> TgrlStatus {
    guard(|| write_out(out, owned(obj(env, "env")?.0.gt_room_id())))
}

/// # Safety
/// `env` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tgrl_env_snapshot(env: *const TgrlEnv, out: *mut *mut TgrlSnapshot) -> TgrlStatus {
    guard(|| {
        let snap = obj(env, "env")?.0.snapshot();
        write_out(out, Box::into_raw(Box::new(TgrlSnapshot(snap))))
    })
}

/// # Safety
/// `env` and `snap` must be valid handles.
#[no_mangle]
pub unsafe extern "C" fn tgrl_env_restore(env: *mut TgrlEnv, snap: *const TgrlSnapshot) -> TgrlStatus {
    guard(|| {
        let env = obj_mut(env, "env")?;
        let snap = obj(snap, "snapshot")?;
        Ok(env.0.restore(&snap.0)?)
    })
}

/// # Safety
/// `snap` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tgrl_snapshot_free(snap: *mut TgrlSnapshot) {
    if !snap.is_null() {
        drop(Box::from_raw(snap));
    }
}

/// Location key of the current state at the given probe depth. Free the
/// string with [`tgrl_string_free`].
///
/// # Safety
/// `env` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tgrl_locate(env: *mut TgrlEnv, depth: usize, out: *mut *mut c_char) -> TgrlStatus {
    guard(|| {
        let env = obj_mut(env, "env")?;
        let key = LocationKey::from_profile(&locate(&mut env.0, depth)?);
        write_out(out, owned(key.as_str()))
    })
}

/// 64-bit hash of a UTF-8 string.
///
/// # Safety
/// `s` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tgrl_str_hash(s: *const c_char, out: *mut u64) -> TgrlStatus {
    guard(|| write_out(out, str_hash(cstr(s, "s")?)))
}

/// Writes the `dim`-dimensional hash vector of `s` into `out`.
///
/// # Safety
/// `s` must be a valid C string and `out` must have room for `dim` values.
#[no_mangle]
pub unsafe extern "C" fn tgrl_hash_vec(s: *const c_char, dim: usize, out: *mut f64) -> TgrlStatus {
    guard(|| {
        let s = cstr(s, "s")?;
        if dim == 0 {
            return fail(TgrlStatus::InvalidArgument, "dim must be positive");
        }
        if out.is_null() {
            return fail(TgrlStatus::NullPointer, "output pointer is null");
        }
        let v = hash_vec(s, &HashConfig::new(dim));
        ptr::copy_nonoverlapping(v.values.as_ptr(), out, dim);
        Ok(())
    })
}
