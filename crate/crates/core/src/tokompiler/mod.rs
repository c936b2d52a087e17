//! Tokompiler: semantics-free anonymization of functions.
//!
//! Declared symbols and literals are replaced by `func_N`, `var_N`, `arr_N`,
//! `num_N` and `str_N` with seeded random suffixes, comments are dropped, and
//! the result is re-parsed and regenerated in a canonical layout. External
//! identifiers, keywords and operators are kept. The rename map makes the
//! transformation reversible.

mod anonymize;
mod iso;
mod lexicalize;

pub use anonymize::{
    anonymize, deanonymize, declared_identifiers, normalize, parse_replacement, unit_seed,
    AnonymizedUnit, Category, RenameEntry, RenameMap, TokompilerConfig,
};
pub use iso::isomorphic;
pub use lexicalize::{lexicalize, lexicalize_source, TokenStream, NEWLINE};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TokompilerError {
    #[error("input has {0} syntax errors")]
    UncleanInput(usize),
    #[error("anonymized code does not re-parse ({errors} syntax errors)")]
    ReparseFailure { errors: usize, code: String },
    #[error("{needed} distinct symbols do not fit suffix range 1..={max}")]
    SuffixExhaustion { needed: usize, max: u64 },
    #[error("no map entry for replacement `{0}`")]
    UnknownReplacement(String),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_str, FileId, FunctionUnit, Language, Span};

    fn unit(src: &str, lang: Language) -> FunctionUnit {
        FunctionUnit {
            source_text: src.to_owned(),
            language: lang,
            file_id: FileId::of_bytes(src.as_bytes()),
            byte_span: Span::new(0, src.len()),
            name: String::new(),
        }
    }

    fn check(src: &str, lang: Language) -> AnonymizedUnit {
        let u = unit(src, lang);
        let a = anonymize(&u, 17, &TokompilerConfig::default()).unwrap_or_else(|e| panic!("{e}: {src}"));
        let back = deanonymize(&a).unwrap();
        assert_eq!(
            lexicalize_source(&back, lang),
            lexicalize_source(&normalize(&u), lang),
            "round trip of {src}\n{}",
            a.code
        );
        let orig = parse_str(src, lang);
        let anon = parse_str(&a.code, lang);
        isomorphic(&orig, &anon).unwrap_or_else(|e| panic!("{e}\n{src}\n{}", a.code));
        let declared = declared_identifiers(&u);
        for t in lexicalize(&a).tokens {
            assert!(!declared.contains(&t), "`{t}` leaked in {}", a.code);
        }
        a
    }

    #[test]
    fn lexicalized_figure_shape() {
        let a = check("int main() { int r[2800 + 1]; }", Language::C);
        let toks = lexicalize(&a).tokens;
        let shape: Vec<&str> = toks
            .iter()
            .map(|t| if t.bytes().all(|b| b.is_ascii_digit()) { "N" } else { t.as_str() })
            .collect();
        assert_eq!(
            shape,
            ["int", "func", "_", "N", "(", ")", "{", "int", "arr", "_", "N", "[", "num", "_", "N", "+", "num", "_", "N", "]", ";", "}"]
        );
        assert_eq!(lexicalize(&a).to_source().replace('\n', " "), a.code.replace('\n', " ").trim_end());
    }

    #[test]
    fn c_round_trips() {
        for src in [
            "void f(){}",
            "static inline double dot(const double *restrict a, const double *b, int n) {\n  double s = 0.0; // acc\n  for (int i = 0; i < n; ++i) s += a[i] * b[i];\n  return s;\n}",
            "int g(int n) {\n  struct P { int x; int y; } p = { 1, 2 };\n  enum { RED, GREEN = 3 } c = GREEN;\n  typedef unsigned long U;\n  U u = (U)n;\n  if (n < 0) goto out;\n  p.x += c + u;\nout:\n  return p.x;\n}",
            "void h(int n, float m[n][n]) {\n#pragma omp parallel for private(j) \\\n    schedule(static, 4)\n  for (int i = 0; i < n; i++)\n    for (int j = 0; j < n; j++)\n      m[i][j] = 0.5f * i;\n}",
            "char *s(void) { static char buf[64]; extern int errno; sprintf(buf, \"%d\" \"x\", errno); return buf; }",
            "int k(int (*cb)(int), int v) { int local(int); return cb(v) + local(v) + 'a' + 0x1F + 1e-3; }",
            "void w(int n) {\n#ifdef DEBUG\n  printf(\"%d\\n\", n);\n#endif\n  while (n--) { switch (n) { case 1: break; default: continue; } }\n}",
        ] {
            check(src, Language::C);
        }
    }

    #[test]
    fn cpp_round_trips() {
        for src in [
            "template <typename T, int N>\nT sum(const std::array<T, N> &xs) {\n  T acc{};\n  for (const auto &x : xs) acc += x;\n  return acc;\n}",
            "int A::g(int z) const { return v + z + std::max(z, 3); }",
            "auto lam(std::vector<int> &v) {\n  auto p = [&](int q) { return q * 2; };\n  std::sort(v.begin(), v.end());\n  return p(v.size());\n}",
            "void pairs(std::map<int, std::string> &m) {\n  for (auto &[k, val] : m) { std::cout << k << \": \" << val << std::endl; }\n  if (auto it = m.find(1); it != m.end()) m.erase(it);\n}",
            "int t() { try { throw std::runtime_error(\"x\"); } catch (const std::exception &e) { return 1; } return 0; }",
        ] {
            check(src, Language::Cpp);
        }
    }

    #[test]
    fn qualified_function_name_is_kept() {
        let a = check("int A::g(int z) { return z; }", Language::Cpp);
        assert!(a.code.starts_with("int A :: g ("), "{}", a.code);
    }
}
