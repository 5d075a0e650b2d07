//! Reading raw event CSVs into validated streams and assembling datasets.
//!
//! On-disk layout:
//!
//! ```text
//! <root>/labels.csv                       user_id,session_dir,session_index,context
//! <root>/<user_id>/<session_dir>/touch.csv
//! <root>/<user_id>/<session_dir>/accel.csv
//! ```
//!
//! Source columns are bound to logical fields through a [`ColumnMap`], kept
//! in JSON so recordings with other schemas only need a different map.

mod synth;

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{
    validate_stream, AccelSample, Context, Millis, SessionId, TouchAction, TouchSample,
};

pub use synth::{generate_synthetic, SynthConfig};

pub const LABELS_FILE: &str = "labels.csv";
pub const TOUCH_FILE: &str = "touch.csv";
pub const ACCEL_FILE: &str = "accel.csv";

/// A source column, by header name or 0-based position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnRef {
    Index(usize),
    Name(String),
}

impl From<&str> for ColumnRef {
    fn from(s: &str) -> Self {
        ColumnRef::Name(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TouchColumns {
    pub t: ColumnRef,
    pub x: ColumnRef,
    pub y: ColumnRef,
    pub pressure: ColumnRef,
    pub action: ColumnRef,
    /// Rows whose pointer id differs from `primary_pointer` are dropped.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pointer: Option<ColumnRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccelColumns {
    pub t: ColumnRef,
    pub ax: ColumnRef,
    pub ay: ColumnRef,
    pub az: ColumnRef,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimestampUnit {
    Ms,
    Ns,
    S,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMap {
    pub touch: TouchColumns,
    pub accel: AccelColumns,
    pub timestamp_unit: TimestampUnit,
    /// Raw action field value to action; unmapped values drop the row.
    pub action_codes: BTreeMap<String, TouchAction>,
    #[serde(default = "default_true")]
    pub has_header: bool,
    #[serde(default)]
    pub primary_pointer: i64,
}

impl Default for ColumnMap {
    /// The layout written by [`write_dataset`].
    fn default() -> Self {
        ColumnMap {
            touch: TouchColumns {
                t: "t".into(),
                x: "x".into(),
                y: "y".into(),
                pressure: "pressure".into(),
                action: "action".into(),
                pointer: None,
            },
            accel: AccelColumns {
                t: "t".into(),
                ax: "ax".into(),
                ay: "ay".into(),
                az: "az".into(),
            },
            timestamp_unit: TimestampUnit::Ms,
            action_codes: BTreeMap::from([
                ("0".to_string(), TouchAction::Down),
                ("1".to_string(), TouchAction::Up),
                ("2".to_string(), TouchAction::Move),
            ]),
            has_header: true,
            primary_pointer: 0,
        }
    }
}

impl ColumnMap {
    pub fn load(path: &Path) -> Result<Self> {
        let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&s)?)
    }
}

fn action_code(a: TouchAction) -> u8 {
    match a {
        TouchAction::Down => 0,
        TouchAction::Up => 1,
        TouchAction::Move => 2,
    }
}

struct CsvSource {
    path: PathBuf,
    reader: csv::Reader<fs::File>,
    headers: Option<csv::StringRecord>,
}

impl CsvSource {
    fn open(path: &Path, has_header: bool) -> Result<Self> {
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(has_header)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(file);
        let headers = if has_header {
            Some(reader.headers()?.clone())
        } else {
            None
        };
        Ok(CsvSource {
            path: path.to_path_buf(),
            reader,
            headers,
        })
    }

    fn resolve(&self, col: &ColumnRef) -> Result<usize> {
        match col {
            ColumnRef::Index(i) => Ok(*i),
            ColumnRef::Name(name) => self
                .headers
                .as_ref()
                .and_then(|h| h.iter().position(|c| c == name))
                .ok_or_else(|| Error::MissingColumn {
                    path: self.path.clone(),
                    column: name.clone(),
                }),
        }
    }
}

struct Row<'a> {
    path: &'a Path,
    line: usize,
    record: &'a csv::StringRecord,
}

impl Row<'_> {
    fn raw(&self, idx: usize, field: &str) -> Result<&str> {
        self.record.get(idx).ok_or_else(|| Error::Parse {
            path: self.path.to_path_buf(),
            row: self.line,
            field: field.to_string(),
            message: format!("row has no column {idx}"),
        })
    }

    fn float(&self, idx: usize, field: &str) -> Result<f64> {
        let raw = self.raw(idx, field)?;
        raw.parse::<f64>().map_err(|e| Error::Parse {
            path: self.path.to_path_buf(),
            row: self.line,
            field: field.to_string(),
            message: format!("{raw:?}: {e}"),
        })
    }

    fn timestamp(&self, idx: usize, unit: TimestampUnit) -> Result<Millis> {
        let raw = self.raw(idx, "t")?;
        if let Ok(v) = raw.parse::<i64>() {
            return Ok(match unit {
                TimestampUnit::Ms => v,
                TimestampUnit::Ns => (v + 500_000).div_euclid(1_000_000),
                TimestampUnit::S => v * 1000,
            });
        }
        let v = self.float(idx, "t")?;
        let ms = match unit {
            TimestampUnit::Ms => v,
            TimestampUnit::Ns => v / 1e6,
            TimestampUnit::S => v * 1e3,
        };
        Ok(ms.round() as Millis)
    }
}

/// Reads a touch CSV. Rows with unmapped action codes or a non-primary
/// pointer are dropped; the result is validated.
pub fn read_touch_events(path: &Path, map: &ColumnMap) -> Result<Vec<TouchSample>> {
    let mut src = CsvSource::open(path, map.has_header)?;
    let c = &map.touch;
    let (ti, xi, yi, pi, ai) = (
        src.resolve(&c.t)?,
        src.resolve(&c.x)?,
        src.resolve(&c.y)?,
        src.resolve(&c.pressure)?,
        src.resolve(&c.action)?,
    );
    let ptr = c.pointer.as_ref().map(|p| src.resolve(p)).transpose()?;

    let mut out = Vec::new();
    let mut record = csv::StringRecord::new();
    while src.reader.read_record(&mut record)? {
        let row = Row {
            path,
            line: record.position().map_or(0, |p| p.line() as usize),
            record: &record,
        };
        if let Some(pi) = ptr {
            let id = row.float(pi, "pointer")?;
            if id != map.primary_pointer as f64 {
                continue;
            }
        }
        let Some(&action) = map.action_codes.get(row.raw(ai, "action")?) else {
            continue;
        };
        out.push(TouchSample {
            t: row.timestamp(ti, map.timestamp_unit)?,
            x: row.float(xi, "x")?,
            y: row.float(yi, "y")?,
            pressure: row.float(pi, "pressure")?.max(0.0),
            action,
        });
    }
    validate_stream(out)
}

pub fn read_accel_events(path: &Path, map: &ColumnMap) -> Result<Vec<AccelSample>> {
    let mut src = CsvSource::open(path, map.has_header)?;
    let c = &map.accel;
    let (ti, xi, yi, zi) = (
        src.resolve(&c.t)?,
        src.resolve(&c.ax)?,
        src.resolve(&c.ay)?,
        src.resolve(&c.az)?,
    );
    let mut out = Vec::new();
    let mut record = csv::StringRecord::new();
    while src.reader.read_record(&mut record)? {
        let row = Row {
            path,
            line: record.position().map_or(0, |p| p.line() as usize),
            record: &record,
        };
        out.push(AccelSample {
            t: row.timestamp(ti, map.timestamp_unit)?,
            ax: row.float(xi, "ax")?,
            ay: row.float(yi, "ay")?,
            az: row.float(zi, "az")?,
        });
    }
    validate_stream(out)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

/// Writes touch samples in the default column layout.
pub fn write_touch_events(path: &Path, samples: &[TouchSample]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["t", "x", "y", "pressure", "action"])?;
    for s in samples {
        w.write_record([
            s.t.to_string(),
            s.x.to_string(),
            s.y.to_string(),
            s.pressure.to_string(),
            action_code(s.action).to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_accel_events(path: &Path, samples: &[AccelSample]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["t", "ax", "ay", "az"])?;
    for s in samples {
        w.write_record([
            s.t.to_string(),
            s.ax.to_string(),
            s.ay.to_string(),
            s.az.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionRecord {
    pub id: SessionId,
    pub session_dir: String,
    pub touch: Vec<TouchSample>,
    pub accel: Vec<AccelSample>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserRecord {
    pub id: String,
    /// Ordered by (context, session index).
    pub sessions: Vec<SessionRecord>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub users: Vec<UserRecord>,
    /// Sessions or users skipped during assembly.
    pub warnings: Vec<String>,
}

impl Dataset {
    pub fn contexts(&self) -> Vec<Context> {
        let mut c: Vec<Context> = self
            .users
            .iter()
            .flat_map(|u| u.sessions.iter().map(|s| s.id.context))
            .collect();
        c.sort();
        c.dedup();
        c
    }

    pub fn n_sessions(&self) -> usize {
        self.users.iter().map(|u| u.sessions.len()).sum()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct LabelRow {
    user_id: String,
    session_dir: String,
    session_index: u8,
    context: Context,
}

/// `(user_id, session_dir)` to `(session_index, context)`.
pub type LabelTable = HashMap<(String, String), (u8, Context)>;

pub fn read_labels(path: &Path) -> Result<LabelTable> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let mut table = LabelTable::new();
    for row in r.deserialize::<LabelRow>() {
        let row = row?;
        table.insert((row.user_id, row.session_dir), (row.session_index, row.context));
    }
    Ok(table)
}

fn sorted_subdirs(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if path.is_dir() {
            out.push((entry.file_name().to_string_lossy().into_owned(), path));
        }
    }
    out.sort();
    Ok(out)
}

/// Walks `root` and loads every labelled session.
pub fn assemble_dataset(root: &Path, map: &ColumnMap, labels: &LabelTable) -> Result<Dataset> {
    let mut ds = Dataset::default();
    for (user, user_dir) in sorted_subdirs(root)? {
        let mut sessions: Vec<SessionRecord> = Vec::new();
        for (session_dir, dir) in sorted_subdirs(&user_dir)? {
            let &(index, context) = labels
                .get(&(user.clone(), session_dir.clone()))
                .ok_or_else(|| Error::LabelMissing {
                    user: user.clone(),
                    session_dir: session_dir.clone(),
                })?;
            let id = SessionId::new(user.clone(), index, context)?;
            if sessions.iter().any(|s| s.id.context == context && s.id.session_index == index) {
                return Err(Error::DuplicateSession {
                    user: user.clone(),
                    context,
                    index,
                });
            }
            let touch_path = dir.join(TOUCH_FILE);
            let touch = match read_touch_events(&touch_path, map) {
                Ok(t) => t,
                Err(Error::EmptyStream) | Err(Error::Io { .. }) => {
                    ds.warnings
                        .push(format!("{user}/{session_dir}: no usable touch events, skipped"));
                    continue;
                }
                Err(e) => return Err(e),
            };
            let accel = match read_accel_events(&dir.join(ACCEL_FILE), map) {
                Ok(a) => a,
                Err(Error::EmptyStream) | Err(Error::Io { .. }) => {
                    ds.warnings
                        .push(format!("{user}/{session_dir}: no accelerometer events"));
                    Vec::new()
                }
                Err(e) => return Err(e),
            };
            sessions.push(SessionRecord {
                id,
                session_dir,
                touch,
                accel,
            });
        }
        if sessions.is_empty() {
            ds.warnings.push(format!("{user}: no usable sessions, excluded"));
            continue;
        }
        sessions.sort_by_key(|s| (s.id.context, s.id.session_index));
        ds.users.push(UserRecord { id: user, sessions });
    }
    for w in &ds.warnings {
        log::warn!("{w}");
    }
    Ok(ds)
}

/// Loads `<root>/labels.csv` and assembles the dataset.
pub fn load_dataset(root: &Path, map: &ColumnMap) -> Result<Dataset> {
    let labels_path = root.join(LABELS_FILE);
    let labels = if labels_path.exists() {
        read_labels(&labels_path)?
    } else {
        LabelTable::new()
    };
    assemble_dataset(root, map, &labels)
}

/// Writes a dataset in the standard layout with the default column map.
pub fn write_dataset(root: &Path, ds: &Dataset) -> Result<()> {
    fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    let labels_path = root.join(LABELS_FILE);
    let mut labels = csv_writer(&labels_path)?;
    for user in &ds.users {
        for s in &user.sessions {
            let dir = root.join(&user.id).join(&s.session_dir);
            fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            write_touch_events(&dir.join(TOUCH_FILE), &s.touch)?;
            write_accel_events(&dir.join(ACCEL_FILE), &s.accel)?;
            labels.serialize(LabelRow {
                user_id: user.id.clone(),
                session_dir: s.session_dir.clone(),
                session_index: s.id.session_index,
                context: s.id.context,
            })?;
        }
    }
    labels.flush().map_err(|e| Error::io(&labels_path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(path: &Path, body: &str) {
        fs::write(path, body).unwrap();
    }

    #[test]
    fn reads_direct_mapping() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("touch.csv");
        write(&p, "t,x,y,pressure,action\n1,10,20,0.5,0\n2,11,21,0.5,2\n3,12,22,0.4,1\n");
        let s = read_touch_events(&p, &ColumnMap::default()).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s[0].action, TouchAction::Down);
        assert_eq!(s[2].action, TouchAction::Up);
        assert_eq!(s[1].x, 11.0);
    }

    #[test]
    fn missing_column_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("touch.csv");
        write(&p, "t,x,y,pressure,action\n1,10,20,0.5,0\n");
        let mut map = ColumnMap::default();
        map.touch.pressure = "Pressur".into();
        match read_touch_events(&p, &map) {
            Err(Error::MissingColumn { column, .. }) => assert_eq!(column, "Pressur"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_error_names_row_and_field() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("accel.csv");
        write(&p, "t,ax,ay,az\n1,0,0,9.8\n2,0,oops,9.8\n");
        match read_accel_events(&p, &ColumnMap::default()) {
            Err(Error::Parse { row, field, .. }) => {
                assert_eq!(row, 3);
                assert_eq!(field, "ay");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_empty_stream() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("accel.csv");
        write(&p, "t,ax,ay,az\n");
        assert!(matches!(
            read_accel_events(&p, &ColumnMap::default()),
            Err(Error::EmptyStream)
        ));
    }

    #[test]
    fn headerless_indices_units_and_pointer_filter() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("touch.csv");
        // ns timestamps, pointer id in column 1, action code 5 is a second finger
        write(
            &p,
            "1000000,0,0,10,20,0.5\n2400000,0,2,11,21,0.5\n2600000,1,5,50,50,0.3\n3000000,0,1,12,22,0.4\n",
        );
        let map = ColumnMap {
            touch: TouchColumns {
                t: ColumnRef::Index(0),
                x: ColumnRef::Index(3),
                y: ColumnRef::Index(4),
                pressure: ColumnRef::Index(5),
                action: ColumnRef::Index(2),
                pointer: Some(ColumnRef::Index(1)),
            },
            timestamp_unit: TimestampUnit::Ns,
            has_header: false,
            ..ColumnMap::default()
        };
        let s = read_touch_events(&p, &map).unwrap();
        assert_eq!(s.iter().map(|s| s.t).collect::<Vec<_>>(), vec![1, 2, 3]);
    }

    #[test]
    fn shipped_hmog_map_parses() {
        let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../config/hmog.map.json");
        let map = ColumnMap::load(&p).unwrap();
        assert!(!map.has_header);
        assert!(map.touch.pointer.is_some());
    }

    fn tiny_session(user: &str, idx: u8) -> SessionRecord {
        SessionRecord {
            id: SessionId::new(user, idx, Context::S1ReadSit).unwrap(),
            session_dir: format!("S1_{idx}"),
            touch: vec![TouchSample {
                t: 1,
                x: 0.1,
                y: 1.0 / 3.0,
                pressure: 0.2,
                action: TouchAction::Down,
            }],
            accel: vec![AccelSample {
                t: 1,
                ax: 0.1,
                ay: -2.5e-7,
                az: 9.80665,
            }],
        }
    }

    #[test]
    fn dataset_round_trip_and_counts() {
        let ds = Dataset {
            users: ["a", "b"]
                .iter()
                .map(|u| UserRecord {
                    id: u.to_string(),
                    sessions: (1..=4).map(|i| tiny_session(u, i)).collect(),
                })
                .collect(),
            warnings: Vec::new(),
        };
        let dir = tempfile::tempdir().unwrap();
        write_dataset(dir.path(), &ds).unwrap();
        let back = load_dataset(dir.path(), &ColumnMap::default()).unwrap();
        assert_eq!(back.users.len(), 2);
        assert_eq!(back.n_sessions(), 8);
        assert_eq!(back, ds);
    }

    #[test]
    fn unlabelled_session_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let ds = Dataset {
            users: vec![UserRecord {
                id: "a".into(),
                sessions: vec![tiny_session("a", 1)],
            }],
            warnings: Vec::new(),
        };
        write_dataset(dir.path(), &ds).unwrap();
        let r = assemble_dataset(dir.path(), &ColumnMap::default(), &LabelTable::new());
        assert!(matches!(r, Err(Error::LabelMissing { .. })));
    }

    #[test]
    fn empty_root_gives_empty_dataset() {
        let dir = tempfile::tempdir().unwrap();
        let ds = load_dataset(dir.path(), &ColumnMap::default()).unwrap();
        assert!(ds.users.is_empty());
    }

    #[test]
    fn users_without_sessions_are_excluded() {
        let dir = tempfile::tempdir().unwrap();
        let sdir = dir.path().join("ghost").join("S1_1");
        fs::create_dir_all(&sdir).unwrap();
        write(&sdir.join(TOUCH_FILE), "t,x,y,pressure,action\n");
        let labels = LabelTable::from([(
            ("ghost".to_string(), "S1_1".to_string()),
            (1, Context::S1ReadSit),
        )]);
        let ds = assemble_dataset(dir.path(), &ColumnMap::default(), &labels).unwrap();
        assert!(ds.users.is_empty());
        assert_eq!(ds.warnings.len(), 2);
    }
}
