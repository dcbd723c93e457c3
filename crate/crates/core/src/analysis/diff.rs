use std::io::Write;

use crate::direction::Orientation;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineChange {
    pub line_id: String,
    pub old_from: String,
    pub old_to: String,
    pub new_from: String,
    pub new_to: String,
}

/// Lines whose direction differs between two orientations of one grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectionDiff {
    pub changes: Vec<LineChange>,
    pub total: usize,
}

impl DirectionDiff {
    pub fn changed(&self) -> usize {
        self.changes.len()
    }

    pub fn changed_ids(&self) -> Vec<&str> {
        self.changes.iter().map(|c| c.line_id.as_str()).collect()
    }

    /// `line_id,old_from,old_to,new_from,new_to`
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["line_id", "old_from", "old_to", "new_from", "new_to"])?;
        for c in &self.changes {
            wtr.write_record([&c.line_id, &c.old_from, &c.old_to, &c.new_from, &c.new_to])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("orientations cover different line sets (first difference at `{0}`)")]
pub struct LineSetMismatch(pub String);

pub fn direction_diff(a: &Orientation, b: &Orientation) -> Result<DirectionDiff, LineSetMismatch> {
    if a.line_ids() != b.line_ids() {
        let first = a
            .line_ids()
            .iter()
            .zip(b.line_ids())
            .find(|(x, y)| x != y)
            .map(|(x, _)| x.clone())
            .or_else(|| {
                let (long, short) = if a.len() > b.len() { (a, b) } else { (b, a) };
                long.line_ids().get(short.len()).cloned()
            })
            .unwrap_or_default();
        return Err(LineSetMismatch(first));
    }
    let changes = (0..a.len())
        .filter_map(|i| {
            let (of, ot) = a.ends(i);
            let (nf, nt) = b.ends(i);
            (of != nf || ot != nt).then(|| LineChange {
                line_id: a.line_ids()[i].clone(),
                old_from: of.to_string(),
                old_to: ot.to_string(),
                new_from: nf.to_string(),
                new_to: nt.to_string(),
            })
        })
        .collect();
    Ok(DirectionDiff {
        changes,
        total: a.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orientation(rows: &[(&str, &str, &str)]) -> Orientation {
        let mut csv = String::from("line_id,from_bus,to_bus,provenance\n");
        for (id, f, t) in rows {
            csv.push_str(&format!("{id},{f},{t},TwoEndVoltage\n"));
        }
        Orientation::read_csv(csv.as_bytes(), "test").unwrap()
    }

    #[test]
    fn identical_is_empty() {
        let a = orientation(&[("L1", "a", "b"), ("L2", "b", "c")]);
        let d = direction_diff(&a, &a).unwrap();
        assert_eq!(d.changed(), 0);
        assert_eq!(d.total, 2);
    }

    #[test]
    fn one_flip() {
        let a = orientation(&[("L1", "a", "b"), ("L2", "b", "c")]);
        let b = orientation(&[("L1", "a", "b"), ("L2", "c", "b")]);
        let d = direction_diff(&a, &b).unwrap();
        assert_eq!(d.changed_ids(), ["L2"]);
        assert_eq!(direction_diff(&b, &a).unwrap().changed(), 1);
        let mut out = Vec::new();
        d.write_csv(&mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "line_id,old_from,old_to,new_from,new_to\nL2,b,c,c,b\n"
        );
    }

    #[test]
    fn different_line_sets() {
        let a = orientation(&[("L1", "a", "b")]);
        let b = orientation(&[("L1", "a", "b"), ("L2", "b", "c")]);
        assert_eq!(direction_diff(&a, &b), Err(LineSetMismatch("L2".into())));
    }
}
