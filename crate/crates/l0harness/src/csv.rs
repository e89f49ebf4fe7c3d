//! Point-stream CSV: one point per line, `x1,...,xd[,group_id][,timestamp]`.
//!
//! Column layout is inferred from the declared dimension: `dim` columns are
//! coordinates, one extra column is a group id, two extras are group id and
//! timestamp. An optional single header line may be skipped.

use std::io::{BufRead, Write};

use l0sketch::datagen::LabeledStream;
use l0sketch::{Error, Point};

/// A parsed stream; group labels are present only when the file carried them.
#[derive(Debug, Clone)]
pub struct ParsedStream {
    pub points: Vec<Point>,
    pub groups: Option<Vec<u64>>,
    pub dim: usize,
}

impl ParsedStream {
    /// Converts to a labeled stream, when labels are present.
    pub fn into_labeled(self, alpha_truth: f64) -> Option<LabeledStream> {
        let groups = self.groups?;
        let n_groups = groups.iter().collect::<std::collections::BTreeSet<_>>().len();
        Some(LabeledStream {
            points: self.points.into_iter().zip(groups).collect(),
            n_groups,
            alpha_truth,
            dim: self.dim,
        })
    }
}

pub fn parse_stream(reader: impl BufRead, dim: usize, has_header: bool) -> Result<ParsedStream, Error> {
    if dim == 0 {
        return Err(Error::Data("dimension must be at least 1"));
    }
    let mut points = Vec::new();
    let mut groups: Option<Vec<u64>> = None;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|_| Error::Data("failed to read input"))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || (lineno == 0 && has_header) {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() < dim || fields.len() > dim + 2 {
            return Err(Error::Data("unexpected number of columns"));
        }
        let coords = fields[..dim]
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| Error::Data("malformed coordinate")))
            .collect::<Result<Vec<f64>, _>>()?;
        let idx = points.len() as u64;
        let mut point = Point::new(coords, idx);
        if fields.len() >= dim + 1 {
            let g = fields[dim]
                .parse::<u64>()
                .map_err(|_| Error::Data("malformed group id"))?;
            groups.get_or_insert_with(Vec::new).push(g);
        }
        if fields.len() == dim + 2 {
            let ts = fields[dim + 1]
                .parse::<u64>()
                .map_err(|_| Error::Data("malformed timestamp"))?;
            point.timestamp = Some(ts);
        } else {
            point.timestamp = Some(idx);
        }
        points.push(point);
    }
    if let Some(g) = &groups {
        if g.len() != points.len() {
            return Err(Error::Data("group column present on only some lines"));
        }
    }
    Ok(ParsedStream { points, groups, dim })
}

pub fn write_stream(
    mut w: impl Write,
    data: &LabeledStream,
    header: bool,
) -> std::io::Result<()> {
    if header {
        let cols: Vec<String> = (1..=data.dim)
            .map(|i| format!("x{i}"))
            .chain(std::iter::once("group_id".to_string()))
            .collect();
        writeln!(w, "{}", cols.join(","))?;
    }
    for (p, g) in &data.points {
        let coords: Vec<String> = p.coords.iter().map(|c| format!("{c}")).collect();
        writeln!(w, "{},{g}", coords.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_with_labels() {
        let data = l0sketch::datagen::generate(
            10,
            3,
            l0sketch::datagen::DuplicateMode::Uniform { max: 2 },
            4,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_stream(&mut buf, &data, true).unwrap();
        let parsed = parse_stream(&buf[..], 3, true).unwrap();
        assert_eq!(parsed.points.len(), data.len());
        let labels = parsed.groups.as_ref().unwrap();
        for (i, (p, g)) in data.points.iter().enumerate() {
            assert_eq!(parsed.points[i].coords, p.coords);
            assert_eq!(labels[i], *g);
        }
    }

    #[test]
    fn bare_coordinates_and_timestamps() {
        let input = "1.0,2.0\n3.5,-0.25\n";
        let parsed = parse_stream(input.as_bytes(), 2, false).unwrap();
        assert_eq!(parsed.points.len(), 2);
        assert!(parsed.groups.is_none());
        assert_eq!(parsed.points[1].coords, vec![3.5, -0.25]);
        // implicit timestamps follow arrival order
        assert_eq!(parsed.points[1].timestamp, Some(1));

        let timed = parse_stream("1.0,2.0,7,100\n".as_bytes(), 2, false).unwrap();
        assert_eq!(timed.points[0].timestamp, Some(100));
        assert_eq!(timed.groups.unwrap(), vec![7]);
    }

    #[test]
    fn malformed_lines_rejected() {
        assert!(parse_stream("1.0\n".as_bytes(), 2, false).is_err());
        assert!(parse_stream("1.0,abc\n".as_bytes(), 2, false).is_err());
        assert!(parse_stream("1.0,2.0,3.0,4.0,5.0\n".as_bytes(), 2, false).is_err());
    }
}
