#![no_main]

use libfuzzer_sys::fuzz_target;

use fibra_cli::{run, Command};
use fibra_core::universe::Universe;

fn parse_command(line: &str) -> Option<Command> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    let owned = |i: usize| tokens.get(i).map(|s| s.to_string());
    match *tokens.first()? {
        "check" => Some(Command::Check {
            object: owned(1)?,
            property: owned(2)?,
        }),
        "compose" => Some(Command::Compose {
            f: owned(1)?,
            g: owned(2)?,
        }),
        "inverse" => Some(Command::Inverse { f: owned(1)? }),
        "image" => Some(Command::Image {
            f: owned(1)?,
            sub: owned(2)?,
        }),
        "quotient" => Some(Command::Quotient {
            bundle: owned(1)?,
            equiv: owned(2)?,
        }),
        "factorize" => Some(Command::Factorize { morphism: owned(1)? }),
        "orbits" => Some(Command::Orbits { rep: owned(1)? }),
        "continuity" => Some(Command::Continuity {
            corr: owned(1)?,
            src_top: owned(2)?,
            dst_top: owned(3)?,
            on: owned(4),
        }),
        "sections" => Some(Command::Sections { reduced: owned(1)? }),
        "classify" => Some(Command::Classify { reduced: owned(1)? }),
        "tower" => Some(Command::Tower { name: owned(1)? }),
        _ => None,
    }
}

// First line names a command, the rest is the universe document. Whatever
// the input, dispatch must not panic and reports must be deterministic.
// A small enumeration bound keeps adversarial documents cheap.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Some((first, rest)) = text.split_once('\n') else {
        return;
    };
    let Some(cmd) = parse_command(first) else {
        return;
    };
    let Ok(universe) = Universe::from_json_str(rest) else {
        return;
    };
    let a = run(&universe, &cmd, 4096);
    let b = run(&universe, &cmd, 4096);
    assert_eq!(a.to_json(), b.to_json());
});
