use std::path::Path;

use slp_core::scenario::{builtin, BUILTIN_NAMES};
use slp_core::{parse_timeline, Error, ParamSet};

fn shipped() -> Vec<(String, String)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/sequences");
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "seq"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            (
                p.display().to_string(),
                std::fs::read_to_string(&p).unwrap(),
            )
        })
        .collect()
}

#[test]
fn shipped_files_survive_print_and_reparse() {
    let files = shipped();
    assert_eq!(files.len(), 3);
    for (name, text) in files {
        let first = parse_timeline(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let printed = first.to_text();
        let second = parse_timeline(&printed).unwrap();
        assert_eq!(first, second, "{name}");
        assert_eq!(printed, second.to_text());
    }
}

#[test]
fn builtin_timelines_round_trip() {
    let p = ParamSet::default();
    for name in BUILTIN_NAMES {
        let tl = builtin(name, &p).unwrap().timeline;
        assert_eq!(parse_timeline(&tl.to_text()).unwrap(), tl, "{name}");
    }
}

fn error_line(text: &str) -> usize {
    match parse_timeline(text) {
        Err(Error::Parse { line, .. }) => line,
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn malformed_lines_are_reported_by_line() {
    let cases = [
        ("duration 5us\nat 1us set FWC 2\n", 2),
        ("duration 5us\ninit FWC 1\n\nat 1 furlong set FWC 0\n", 4),
        ("duration 5us\nat 1us probe ch=0 fwhm=1us amp=1\n", 2),
        ("duration 5us\nat 1us probe ch=1 fwhm=1us\n", 2),
        ("duration 5us\nat 6us set FWC 1\n", 2),
        (
            "duration 5us\nat 1us set BWC 1 ramp=1us\nat 1.5us set BWC 0\n",
            3,
        ),
        ("duration 5us\nat 1us set FWC 1 now\n", 2),
        ("duration 5us\nhold FWC\n", 2),
        (
            "# header\nduration 5us\nsweep BWC at=2us from=1us to=3us step=1us\n",
            3,
        ),
    ];
    for (text, line) in cases {
        assert_eq!(error_line(text), line, "{text:?}");
    }
}
