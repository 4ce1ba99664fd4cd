//! Bimodal stimuli and the two-phase presentation protocol.
//!
//! A stimulus is a pair of 10x10 black/white glyphs, one per perceptive
//! layer. During a 100 ms presentation the pair is injected 10 times, once
//! at the first millisecond of every 10 ms slot: each black pixel forces a
//! spike of the matching perceptive pyramidal neuron; white pixels are
//! silent.
//!
//! The protocol presents the full set of 10 pairs in fixed order for ten
//! sequences (the learning phase, presentations p = 1..10, 10 s total),
//! immediately followed by ten more sequences in seeded random order per
//! sequence (the discrimination phase, p = 11..20).

use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::network::LayerId;
use crate::{Error, Result};

/// Glyph edge length in pixels; also the layer width in neurons per row.
pub const GRID: usize = 10;
/// Length of one presentation (ms).
pub const PRESENTATION_MS: u32 = 100;
/// Injection slot width within a presentation (ms).
pub const SLOT_MS: u32 = 10;
/// Injections per presentation.
pub const REPETITIONS: u32 = 10;
/// Stimulus pairs in a set.
pub const SET_SIZE: usize = 10;
/// Presentations of the set per phase.
pub const SEQUENCES_PER_PHASE: u32 = 10;
/// Simulated duration of the full two-phase protocol (ms).
pub const PROTOCOL_MS: u32 = 2 * SEQUENCES_PER_PHASE * SET_SIZE as u32 * PRESENTATION_MS;

/// One 10x10 black/white glyph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    pub label: char,
    /// Row-major; `true` is a black pixel.
    pub pixels: Vec<bool>,
}

impl Pattern {
    pub fn validate(&self) -> Result<()> {
        if self.pixels.len() != GRID * GRID {
            return Err(Error::PatternFormat {
                line: 0,
                reason: format!("glyph '{}' has {} pixels, expected 100", self.label, self.pixels.len()),
            });
        }
        if !self.pixels.iter().any(|&p| p) {
            return Err(Error::PatternFormat {
                line: 0,
                reason: format!("glyph '{}' has no black pixel", self.label),
            });
        }
        Ok(())
    }

    /// Indices (row-major) of the black pixels.
    pub fn black_pixels(&self) -> impl Iterator<Item = usize> + '_ {
        self.pixels
            .iter()
            .enumerate()
            .filter_map(|(j, &black)| black.then_some(j))
    }

    pub fn black_count(&self) -> usize {
        self.pixels.iter().filter(|&&p| p).count()
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}:", self.label)?;
        for row in 0..GRID {
            for col in 0..GRID {
                f.write_str(if self.pixels[row * GRID + col] { "#" } else { "." })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// The ordered set of ten bimodal pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StimulusSet {
    pub pairs: Vec<(Pattern, Pattern)>,
}

impl StimulusSet {
    pub fn validate(&self) -> Result<()> {
        if self.pairs.len() != SET_SIZE {
            return Err(Error::PatternFormat {
                line: 0,
                reason: format!("expected {} pairs, got {}", SET_SIZE, self.pairs.len()),
            });
        }
        let mut labels = Vec::new();
        for (a, b) in &self.pairs {
            a.validate()?;
            b.validate()?;
            for p in [a, b] {
                if labels.contains(&p.label) {
                    return Err(Error::PatternFormat {
                        line: 0,
                        reason: format!("duplicate glyph label '{}'", p.label),
                    });
                }
                labels.push(p.label);
            }
        }
        Ok(())
    }

    /// The built-in glyphs: letters A..J paired with digits 1..9 and 0.
    pub fn builtin() -> Self {
        let set = parse_patterns(BUILTIN_GLYPHS, "builtin").expect("builtin glyph set is well-formed");
        set.validate().expect("builtin glyph set is valid");
        set
    }

    /// Loads a glyph file: blocks of a `label:` line followed by ten rows of
    /// ten characters from `{#, .}`, separated by blank lines; consecutive
    /// blocks form the pairs.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            context: format!("reading pattern file {}", path.display()),
            source: e,
        })?;
        let set = parse_patterns(&text, &path.display().to_string())?;
        set.validate()?;
        Ok(set)
    }
}

fn parse_patterns(text: &str, source: &str) -> Result<StimulusSet> {
    let mut glyphs: Vec<Pattern> = Vec::new();
    let mut lines = text.lines().enumerate().peekable();
    while let Some((line_no, line)) = lines.next() {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let Some(label_part) = line.strip_suffix(':') else {
            return Err(Error::PatternFormat {
                line: line_no + 1,
                reason: format!("{source}: expected 'label:' line, got '{line}'"),
            });
        };
        let mut chars = label_part.chars();
        let (Some(label), None) = (chars.next(), chars.next()) else {
            return Err(Error::PatternFormat {
                line: line_no + 1,
                reason: format!("{source}: glyph label must be a single character, got '{label_part}'"),
            });
        };
        let mut pixels = Vec::with_capacity(GRID * GRID);
        for row in 0..GRID {
            let Some((row_no, row_line)) = lines.next() else {
                return Err(Error::PatternFormat {
                    line: line_no + 1,
                    reason: format!("{source}: glyph '{label}' ends after {row} of {GRID} rows"),
                });
            };
            let row_line = row_line.trim_end();
            if row_line.chars().count() != GRID {
                return Err(Error::PatternFormat {
                    line: row_no + 1,
                    reason: format!(
                        "{source}: glyph '{label}' row has {} columns, expected {GRID}",
                        row_line.chars().count()
                    ),
                });
            }
            for c in row_line.chars() {
                match c {
                    '#' => pixels.push(true),
                    '.' => pixels.push(false),
                    other => {
                        return Err(Error::PatternFormat {
                            line: row_no + 1,
                            reason: format!("{source}: invalid pixel character '{other}'"),
                        })
                    }
                }
            }
        }
        let glyph = Pattern { label, pixels };
        if glyph.black_count() == 0 {
            return Err(Error::PatternFormat {
                line: line_no + 1,
                reason: format!("{source}: glyph '{label}' has no black pixel"),
            });
        }
        glyphs.push(glyph);
    }
    if glyphs.len() != 2 * SET_SIZE {
        return Err(Error::PatternFormat {
            line: 0,
            reason: format!("{source}: expected {} glyphs, got {}", 2 * SET_SIZE, glyphs.len()),
        });
    }
    let mut pairs = Vec::with_capacity(SET_SIZE);
    let mut iter = glyphs.into_iter();
    while let (Some(a), Some(b)) = (iter.next(), iter.next()) {
        pairs.push((a, b));
    }
    Ok(StimulusSet { pairs })
}

/// One scheduled forced emission.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InjectionEvent {
    pub t: u32,
    pub layer: LayerId,
    pub neuron: usize,
}

/// All forced emissions of one presentation (or of a whole run).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InjectionSchedule {
    pub events: Vec<InjectionEvent>,
}

/// Expands a pair presentation starting at `t0` into forced spikes: one per
/// black pixel at the first millisecond of each 10 ms slot.
pub fn encode_presentation(pair: &(Pattern, Pattern), t0: u32) -> InjectionSchedule {
    let mut events = Vec::new();
    for r in 0..REPETITIONS {
        let t = t0 + r * SLOT_MS;
        for (layer, pattern) in [(LayerId::Perceptive1, &pair.0), (LayerId::Perceptive2, &pair.1)] {
            for neuron in pattern.black_pixels() {
                events.push(InjectionEvent { t, layer, neuron });
            }
        }
    }
    InjectionSchedule { events }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Learning,
    Discrimination,
}

impl Phase {
    pub fn number(&self) -> u8 {
        match self {
            Phase::Learning => 1,
            Phase::Discrimination => 2,
        }
    }
}

/// One presentation slot of the protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProtocolEntry {
    pub phase: Phase,
    /// Presentation step of the set: 1..10 in phase 1, 11..20 in phase 2.
    pub p: u32,
    /// Stimulus index, 1-based.
    pub stimulus: usize,
    pub t0: u32,
}

/// Lays out the full two-phase protocol.
///
/// Phase 1 presents stimuli 1..10 in fixed order within each of ten
/// sequences. Phase 2 shuffles the order independently per sequence, drawing
/// from stream 1 of the seeded generator (the topology uses stream 0), so a
/// seed pins both the wiring and the presentation order.
pub fn protocol_schedule(seed: u64) -> Vec<ProtocolEntry> {
    let mut entries = Vec::with_capacity(200);
    for p in 1..=SEQUENCES_PER_PHASE {
        for l in 1..=SET_SIZE {
            let t0 = (p - 1) * 1000 + (l as u32 - 1) * PRESENTATION_MS;
            entries.push(ProtocolEntry {
                phase: Phase::Learning,
                p,
                stimulus: l,
                t0,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let phase2_base = SEQUENCES_PER_PHASE * SET_SIZE as u32 * PRESENTATION_MS;
    for p in 11..=2 * SEQUENCES_PER_PHASE {
        let mut order: Vec<usize> = (1..=SET_SIZE).collect();
        order.shuffle(&mut rng);
        for (q, &l) in order.iter().enumerate() {
            let t0 = phase2_base + (p - 11) * 1000 + q as u32 * PRESENTATION_MS;
            entries.push(ProtocolEntry {
                phase: Phase::Discrimination,
                p,
                stimulus: l,
                t0,
            });
        }
    }
    entries
}

/// Expands a protocol into the full forced-spike schedule for one run.
pub fn full_injection_schedule(set: &StimulusSet, entries: &[ProtocolEntry]) -> InjectionSchedule {
    let mut all = InjectionSchedule::default();
    for e in entries {
        let pair = &set.pairs[e.stimulus - 1];
        all.events
            .extend(encode_presentation(pair, e.t0).events);
    }
    all
}

/// Schedule export, one `phase,p,l,t0_ms` row per presentation.
pub fn schedule_csv(entries: &[ProtocolEntry]) -> String {
    let mut out = String::from("phase,p,l,t0_ms\n");
    for e in entries {
        out.push_str(&format!("{},{},{},{}\n", e.phase.number(), e.p, e.stimulus, e.t0));
    }
    out
}

const BUILTIN_GLYPHS: &str = "\
A:
......###.
.....#...#
.....#...#
.....#####
.....#...#
.....#...#
.....#...#
..........
..........
..........

1:
......#...
.....##...
....#.#...
......#...
......#...
......#...
....#####.
..........
..........
..........

B:
..........
####......
#...#.....
#...#.....
####......
#...#.....
#...#.....
####......
..........
..........

2:
..........
..........
.###......
#...#.....
....#.....
...#......
..#.......
.#........
#####.....
..........

C:
..........
....####..
...#......
...#......
...#......
...#......
...#......
....####..
..........
..........

3:
..........
..........
.....####.
.........#
.........#
......###.
.........#
.........#
.....####.
..........

D:
..........
..........
..........
..####....
..#...#...
..#...#...
..#...#...
..#...#...
..#...#...
..####....

4:
..........
..........
..........
...#......
..##......
.#.#......
#..#......
#####.....
...#......
...#......

E:
..........
..........
.#####....
.#........
.#........
.####.....
.#........
.#........
.#####....
..........

5:
..........
..........
..........
....#####.
....#.....
....####..
........#.
........#.
....#...#.
.....###..

F:
..........
..........
....#####.
....#.....
....#.....
....####..
....#.....
....#.....
....#.....
..........

6:
.###......
#.........
#.........
####......
#...#.....
#...#.....
.###......
..........
..........
..........

G:
..####....
.#........
.#........
.#..##....
.#...#....
.#...#....
..###.....
..........
..........
..........

7:
..........
.....#####
.........#
........#.
.......#..
.......#..
......#...
......#...
..........
..........

H:
..........
..........
..........
...#...#..
...#...#..
...#...#..
...#####..
...#...#..
...#...#..
...#...#..

8:
..........
....###...
...#...#..
...#...#..
....###...
...#...#..
...#...#..
....###...
..........
..........

I:
..........
..........
.......###
........#.
........#.
........#.
........#.
........#.
.......###
..........

9:
..........
..........
..........
..###.....
.#...#....
.#...#....
..####....
.....#....
.....#....
..###.....

J:
....####..
......#...
......#...
......#...
......#...
..#...#...
...###....
..........
..........
..........

0:
..........
..........
...###....
..#...#...
..#..##...
..#.#.#...
..##..#...
..#...#...
...###....
..........
";
