//! Text file formats: sandpile states, odometers, integer grid functions,
//! and the JSON reports the CLI prints. All big integers travel as decimal
//! strings; round-trips are bit-exact.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use sandpile_core::coord::Rect;
use sandpile_core::sink::SinkSpec;
use sandpile_core::state::{Odometer, SandState};

#[derive(Debug)]
pub enum CliError {
    Core(sandpile_core::Error),
    Io(String),
    Json(serde_json::Error),
    Format(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(msg) => write!(f, "io error: {msg}"),
            CliError::Json(e) => write!(f, "malformed file: {e}"),
            CliError::Format(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<sandpile_core::Error> for CliError {
    fn from(e: sandpile_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Json(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
        }
    }
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// Sink specs
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SinkSpecFile {
    PeriodicLattice { m: i64, n: i64 },
    RayComplement,
    TruncatedRay { length: i64 },
    FullLineComplement,
    LineWithIntervals { intervals: Vec<(i64, i64)> },
    TorusQuotient { m: i64, n: i64, sinks: Vec<(i64, i64)> },
    Explicit { window: [i64; 4], sinks: Vec<(i64, i64)> },
}

pub fn spec_to_file(spec: &SinkSpec) -> SinkSpecFile {
    match spec {
        SinkSpec::PeriodicLattice { m, n } => SinkSpecFile::PeriodicLattice { m: *m, n: *n },
        SinkSpec::RayComplement => SinkSpecFile::RayComplement,
        SinkSpec::TruncatedRay { len } => SinkSpecFile::TruncatedRay { length: *len },
        SinkSpec::FullLineComplement => SinkSpecFile::FullLineComplement,
        SinkSpec::LineWithIntervals { intervals } => {
            SinkSpecFile::LineWithIntervals { intervals: intervals.clone() }
        }
        SinkSpec::TorusQuotient { m, n, sinks } => SinkSpecFile::TorusQuotient {
            m: *m,
            n: *n,
            sinks: sinks.iter().copied().collect(),
        },
        SinkSpec::Explicit { cells, window } => SinkSpecFile::Explicit {
            window: [window.x0, window.y0, window.x1, window.y1],
            sinks: cells.iter().copied().collect(),
        },
    }
}

pub fn spec_from_file(file: &SinkSpecFile) -> CliResult<SinkSpec> {
    Ok(match file {
        SinkSpecFile::PeriodicLattice { m, n } => SinkSpec::periodic(*m, *n)?,
        SinkSpecFile::RayComplement => SinkSpec::RayComplement,
        SinkSpecFile::TruncatedRay { length } => SinkSpec::truncated_ray(*length)?,
        SinkSpecFile::FullLineComplement => SinkSpec::FullLineComplement,
        SinkSpecFile::LineWithIntervals { intervals } => {
            SinkSpec::line_with_intervals(intervals.clone())?
        }
        SinkSpecFile::TorusQuotient { m, n, sinks } => {
            SinkSpec::torus(*m, *n, sinks.iter().copied().collect::<BTreeSet<_>>())?
        }
        SinkSpecFile::Explicit { window, sinks } => {
            let rect = rect_from_array(*window)?;
            SinkSpec::explicit(sinks.iter().copied().collect(), rect)?
        }
    })
}

fn rect_from_array(a: [i64; 4]) -> CliResult<Rect> {
    if a[0] > a[2] || a[1] > a[3] {
        return Err(CliError::Format("window must satisfy x0 <= x1 and y0 <= y1".into()));
    }
    Ok(Rect::new(a[0], a[1], a[2], a[3]))
}

pub fn rect_to_array(r: Rect) -> [i64; 4] {
    [r.x0, r.y0, r.x1, r.y1]
}

// ---------------------------------------------------------------------------
// State files
// ---------------------------------------------------------------------------

/// On-disk sandpile state: header plus rows of decimal strings. Row `r`
/// holds the cells with `y = y0 + r`, ordered by increasing `x`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub format_version: u32,
    pub sink_spec: SinkSpecFile,
    pub window: [i64; 4],
    pub background: u8,
    pub cells: Vec<Vec<String>>,
}

pub fn state_to_file(state: &SandState) -> StateFile {
    let window = state.window();
    let w = window.width() as usize;
    let cells = state
        .cells()
        .chunks(w)
        .map(|row| row.iter().map(|v| v.to_string()).collect())
        .collect();
    StateFile {
        format_version: 1,
        sink_spec: spec_to_file(state.spec()),
        window: rect_to_array(window),
        background: state.background(),
        cells,
    }
}

pub fn state_from_file(file: &StateFile) -> CliResult<SandState> {
    if file.format_version != 1 {
        return Err(CliError::Format(format!(
            "unsupported format_version {}",
            file.format_version
        )));
    }
    let spec = spec_from_file(&file.sink_spec)?;
    let window = rect_from_array(file.window)?;
    if file.cells.len() != window.height() as usize {
        return Err(CliError::Format(format!(
            "window/array size mismatch: {} rows for height {}",
            file.cells.len(),
            window.height()
        )));
    }
    let mut cells = Vec::with_capacity(window.area() as usize);
    for (r, row) in file.cells.iter().enumerate() {
        if row.len() != window.width() as usize {
            return Err(CliError::Format(format!(
                "window/array size mismatch: row {} has {} cells for width {}",
                r,
                row.len(),
                window.width()
            )));
        }
        for value in row {
            cells.push(parse_biguint(value)?);
        }
    }
    Ok(SandState::from_cells(spec, window, file.background, cells)?)
}

pub fn parse_biguint(s: &str) -> CliResult<BigUint> {
    let t = s.trim();
    if t.starts_with('-') {
        return Err(CliError::Format(format!("negative cell value: {t}")));
    }
    t.parse::<BigUint>()
        .map_err(|_| CliError::Format(format!("not a decimal grain count: {t:?}")))
}

pub fn write_state(path: &Path, state: &SandState) -> CliResult<()> {
    let file = state_to_file(state);
    let mut text = serde_json::to_string_pretty(&file)?;
    text.push('\n');
    write_file(path, &text)
}

pub fn read_state(path: &Path) -> CliResult<SandState> {
    let text = read_file(path)?;
    let file: StateFile = serde_json::from_str(&text)?;
    state_from_file(&file)
}

// ---------------------------------------------------------------------------
// Odometer files
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OdometerFile {
    pub format_version: u32,
    pub kind: String,
    pub window: [i64; 4],
    pub counts: Vec<Vec<String>>,
}

pub fn odometer_to_file(odometer: &Odometer) -> OdometerFile {
    let window = odometer.window();
    let w = window.width() as usize;
    let counts = odometer
        .counts()
        .chunks(w)
        .map(|row| row.iter().map(|v| v.to_string()).collect())
        .collect();
    OdometerFile {
        format_version: 1,
        kind: "odometer".into(),
        window: rect_to_array(window),
        counts,
    }
}

pub fn write_odometer(path: &Path, odometer: &Odometer) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(&odometer_to_file(odometer))?;
    text.push('\n');
    write_file(path, &text)
}

// ---------------------------------------------------------------------------
// Integer grid functions (Poisson right-hand sides)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionFile {
    pub format_version: u32,
    pub kind: String,
    pub window: [i64; 4],
    pub values: Vec<Vec<i64>>,
}

pub fn read_function(path: &Path) -> CliResult<(Rect, Vec<i64>)> {
    let text = read_file(path)?;
    let file: FunctionFile = serde_json::from_str(&text)?;
    if file.format_version != 1 {
        return Err(CliError::Format("unsupported format_version".into()));
    }
    let window = rect_from_array(file.window)?;
    if file.values.len() != window.height() as usize
        || file.values.iter().any(|r| r.len() != window.width() as usize)
    {
        return Err(CliError::Format("window/array size mismatch".into()));
    }
    Ok((window, file.values.into_iter().flatten().collect()))
}

pub fn write_function(path: &Path, window: Rect, values: &[i64]) -> CliResult<()> {
    let file = FunctionFile {
        format_version: 1,
        kind: "function".into(),
        window: rect_to_array(window),
        values: values.chunks(window.width() as usize).map(|r| r.to_vec()).collect(),
    };
    let mut text = serde_json::to_string_pretty(&file)?;
    text.push('\n');
    write_file(path, &text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use sandpile_core::coord::Coord;

    #[test]
    fn state_roundtrip_is_exact() {
        let spec = SinkSpec::periodic(2, 3).unwrap();
        let mut state = SandState::new(spec, Rect::new(-2, -2, 4, 4), 2).unwrap();
        state
            .add_grains(Coord::new(1, 1), &"123456789012345678901234567890".parse().unwrap())
            .unwrap();
        let file = state_to_file(&state);
        let text = serde_json::to_string_pretty(&file).unwrap();
        let parsed: StateFile = serde_json::from_str(&text).unwrap();
        let back = state_from_file(&parsed).unwrap();
        assert_eq!(back, state);
        // and the serialization itself is stable
        assert_eq!(serde_json::to_string_pretty(&state_to_file(&back)).unwrap(), text);
    }

    #[test]
    fn negative_cell_rejected() {
        let spec = SinkSpec::truncated_ray(2).unwrap();
        let mut file = state_to_file(&SandState::new(spec, Rect::new(1, 0, 2, 0), 0).unwrap());
        file.cells[0][1] = "-3".into();
        let err = state_from_file(&file).unwrap_err();
        assert!(format!("{err}").contains("negative cell"));
    }

    #[test]
    fn unstable_background_rejected() {
        let spec = SinkSpec::truncated_ray(2).unwrap();
        let mut file = state_to_file(&SandState::new(spec, Rect::new(1, 0, 2, 0), 0).unwrap());
        file.background = 4;
        let err = state_from_file(&file).unwrap_err();
        assert!(format!("{err}").contains("stable"));
    }

    #[test]
    fn size_mismatch_rejected() {
        let spec = SinkSpec::truncated_ray(3).unwrap();
        let mut file = state_to_file(&SandState::new(spec, Rect::new(1, 0, 3, 0), 0).unwrap());
        file.cells[0].pop();
        let err = state_from_file(&file).unwrap_err();
        assert!(format!("{err}").contains("mismatch"));
    }
}
