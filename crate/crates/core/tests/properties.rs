use lambdix_core::gen::ProgramGen;
use lambdix_core::{read_program, run_with_limit, Config, Interpreter, SourceExpr, Strategy};
use proptest::prelude::{any, prop, prop_assert_eq, prop_oneof, proptest, ProptestConfig};
use proptest::strategy::Strategy as _;

const STEP_LIMIT: u64 = 10_000;

fn big_stack<T: Send + 'static, F: FnOnce() -> T + Send + 'static>(f: F) -> T {
    std::thread::Builder::new().stack_size(1 << 30).spawn(f).unwrap().join().unwrap()
}

fn program(seed: u64) -> String {
    ProgramGen::new(seed).program()
}

fn source_expr() -> impl proptest::strategy::Strategy<Value = SourceExpr> {
    let leaf = prop_oneof![
        "[a-z][a-z0-9?*<>=+-]{0,6}".prop_map(|s| SourceExpr::symbol(&s)),
        any::<i64>().prop_map(SourceExpr::Number),
        "[ -~\n\t]{0,8}".prop_map(|s| SourceExpr::Str(s.as_str().into())),
    ];
    leaf.prop_recursive(4, 32, 5, |inner| prop::collection::vec(inner, 0..5).prop_map(SourceExpr::List))
}

/// Prefixes every generator-made name; operators and literals are left alone.
fn rename(text: &str) -> String {
    let mut out = String::new();
    let mut word = String::new();
    let flush = |word: &mut String, out: &mut String| {
        let mut chars = word.chars();
        let generated = matches!(chars.next(), Some('g' | 'n' | 'm' | 'x' | 'l' | 'h' | 'p' | 'v'))
            && chars.clone().next().is_some()
            && chars.all(|c| c.is_ascii_digit());
        if generated {
            out.push_str("renamed_");
        }
        out.push_str(word);
        word.clear();
    };
    for c in text.chars() {
        if c.is_alphanumeric() || c == '_' {
            word.push(c);
        } else {
            flush(&mut word, &mut out);
            out.push(c);
        }
    }
    flush(&mut word, &mut out);
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn printed_source_reads_back(e in source_expr()) {
        let text = e.to_string();
        prop_assert_eq!(read_program(&text).unwrap(), vec![e]);
    }

    #[test]
    fn generated_programs_read_back(seed in any::<u64>()) {
        let forms = read_program(&program(seed)).unwrap();
        let text: Vec<String> = forms.iter().map(|f| f.to_string()).collect();
        prop_assert_eq!(read_program(&text.join("\n")).unwrap(), forms);
    }

    #[test]
    fn renaming_bound_names_changes_nothing(seed in any::<u64>()) {
        let p = program(seed);
        let q = rename(&p);
        big_stack(move || {
            for strategy in Strategy::BOTH {
                let a = run_with_limit(&p, strategy, STEP_LIMIT);
                let mut b = run_with_limit(&q, strategy, STEP_LIMIT);
                // Closure labels carry the name.
                if let Ok(v) = &mut b.result {
                    *v = v.replace("renamed_", "");
                }
                b.output = b.output.replace("renamed_", "");
                assert!(a.agrees_with(&b), "{}\n{}\n{}", p, a, b);
            }
        });
    }

    #[test]
    fn excla_undoes_quote(seed in any::<u64>()) {
        let p = program(seed);
        let forms = read_program(&p).unwrap();
        let (last, defs) = forms.split_last().unwrap();
        let defs: Vec<String> = defs.iter().map(|f| f.to_string()).collect();
        let direct = format!("{}\n{}", defs.join("\n"), last);
        let quoted = format!("{}\n(! '{})", defs.join("\n"), last);
        big_stack(move || {
            for strategy in Strategy::BOTH {
                let a = run_with_limit(&direct, strategy, STEP_LIMIT);
                let b = run_with_limit(&quoted, strategy, STEP_LIMIT * 2);
                assert!(a.is_limit() || a.agrees_with(&b), "{}\n{}\n{}", direct, a, b);
            }
        });
    }

    #[test]
    fn need_agrees_wherever_value_terminates(seed in any::<u64>()) {
        let p = program(seed);
        big_stack(move || {
            let v = run_with_limit(&p, Strategy::Value, STEP_LIMIT);
            if let Ok(value) = &v.result {
                let n = run_with_limit(&p, Strategy::Need, STEP_LIMIT);
                // Output order may differ because arguments print when forced.
                assert_eq!(n.result.as_ref().ok(), Some(value), "{}", p);
            }
        });
    }

    #[test]
    fn thunks_are_forced_at_most_once(seed in any::<u64>()) {
        let p = program(seed);
        big_stack(move || {
            let mut i = Interpreter::new(Config::new(Strategy::Need).with_step_limit(STEP_LIMIT));
            let _ = i.run_outcome(&p);
            let c = i.counters();
            assert!(c.thunks_forced <= c.thunks_created, "{}", p);
        });
    }

    #[test]
    fn toplevel_forms_restore_every_link(seed in any::<u64>()) {
        let p = program(seed);
        big_stack(move || {
            for strategy in Strategy::BOTH {
                let mut i = Interpreter::new(Config::new(strategy).with_step_limit(STEP_LIMIT));
                for form in read_program(&p).unwrap() {
                    let before = i.link_snapshot();
                    let _ = i.eval_toplevel(&form);
                    let after = i.link_snapshot();
                    assert_eq!(&after[..before.len()], &before[..], "{}", p);
                    assert!(after[before.len()..].iter().all(|l| *l == (None, 0)), "{}", p);
                }
            }
        });
    }
}
