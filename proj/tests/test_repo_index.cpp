#include "repoloc/repo_index.hpp"

#include "support/fixtures.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace repoloc;
using namespace repoloc::index;
using testsupport::TempDir;

namespace {

RepoIndex build_small(const TempDir& dir, IndexConfig config = {}) {
    testsupport::write_small_fixture(dir.path());
    if (config.root_label.empty()) {
        config.root_label = "fixture";
    }
    return build_index(dir.path(), config);
}

std::string file_slice(const std::filesystem::path& path, int start, int end) {
    std::ifstream in(path, std::ios::binary);
    std::string line;
    std::string out;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line_number < start || line_number > end) {
            continue;
        }
        if (line_number > start) {
            out += '\n';
        }
        out += line;
    }
    return out;
}

} // namespace

TEST_CASE("build_index enumerates the fixture entities") {
    TempDir dir;
    RepoIndex idx = build_small(dir);

    CHECK(idx.file_count() == 2);
    CHECK(idx.entity_count() == 3);
    CHECK(idx.find_entity("a.py", "f") != nullptr);
    CHECK(idx.find_entity("pkg/b.py", "C") != nullptr);
    CHECK(idx.find_entity("pkg/b.py", "C.m") != nullptr);
    CHECK(idx.find_entity("a.py", "missing") == nullptr);

    const CodeEntity* f = idx.find_entity("a.py", "f");
    CHECK(f->source_text == "def f(x):\n    return x + 1");
}

TEST_CASE("build_index errors") {
    CHECK_THROWS_AS(build_index("/no/such/path"), RootNotFound);

    TempDir dir;
    dir.write("README.md", "no python here\n");
    CHECK_THROWS_AS(build_index(dir.path()), EmptyRepository);
}

TEST_CASE("parse failures degrade to file-level visibility") {
    TempDir dir;
    dir.write("broken.py", "TEXT = \"\"\"unclosed\nmore\n");
    RepoIndex idx = build_index(dir.path());
    CHECK(idx.file_count() == 1);
    CHECK(idx.entity_count() == 0);
    CHECK(idx.files()[0].parse_error);
}

TEST_CASE("hidden directories and non-source files are excluded") {
    TempDir dir;
    testsupport::write_small_fixture(dir.path());
    dir.write(".hidden/ghost.py", "def ghost():\n    pass\n");
    dir.write("__pycache__/junk.py", "def junk():\n    pass\n");
    dir.write("notes.txt", "not code\n");
    dir.write("README.md", "# docs\n");

    RepoIndex idx = build_index(dir.path());
    CHECK(idx.file_count() == 2);
    CHECK(idx.find_file(".hidden/ghost.py") == nullptr);
    CHECK(idx.find_file("__pycache__/junk.py") == nullptr);
}

TEST_CASE("render_structure matches the expected tree") {
    TempDir dir;
    RepoIndex idx = build_small(dir);
    CHECK(render_structure(idx, 5) ==
          "fixture/\n"
          "  a.py\n"
          "  pkg/\n"
          "    b.py");
}

TEST_CASE("render_structure truncates below max_depth with an elision marker") {
    TempDir dir;
    RepoIndex idx = build_small(dir);
    CHECK(render_structure(idx, 1) ==
          "fixture/\n"
          "  a.py\n"
          "  pkg/\n"
          "    ...");
}

TEST_CASE("render_structure handles deeper nesting and sibling ordering") {
    TempDir dir;
    dir.write("zeta.py", "x = 1\n");
    dir.write("alpha/one.py", "x = 1\n");
    dir.write("alpha/deep/two.py", "x = 1\n");
    dir.write("beta/three.py", "x = 1\n");
    IndexConfig config;
    config.root_label = "nested";
    RepoIndex idx = build_index(dir.path(), config);

    CHECK(render_structure(idx, 8) ==
          "nested/\n"
          "  alpha/\n"
          "    deep/\n"
          "      two.py\n"
          "    one.py\n"
          "  beta/\n"
          "    three.py\n"
          "  zeta.py");
    CHECK(render_structure(idx, 2) ==
          "nested/\n"
          "  alpha/\n"
          "    deep/\n"
          "      ...\n"
          "    one.py\n"
          "  beta/\n"
          "    three.py\n"
          "  zeta.py");
}

TEST_CASE("render_structure lists parse-error files") {
    TempDir dir;
    testsupport::write_small_fixture(dir.path());
    dir.write("broken.py", "TEXT = \"\"\"unclosed\n");
    IndexConfig config;
    config.root_label = "fixture";
    RepoIndex idx = build_index(dir.path(), config);
    CHECK(render_structure(idx, 5).find("broken.py") != std::string::npos);
}

TEST_CASE("imports_of returns source order and echoes missing paths") {
    TempDir dir;
    testsupport::write_small_fixture(dir.path());
    dir.write("imp.py", "import os\nfrom x.y import z\n\n\ndef nothing():\n    pass\n");
    RepoIndex idx = build_index(dir.path());

    const auto& imports = imports_of(idx, "imp.py");
    REQUIRE(imports.size() == 2);
    CHECK(imports[0].raw_text == "import os");
    CHECK(imports[1].raw_text == "from x.y import z");

    CHECK(imports_of(idx, "a.py").empty());

    CHECK_THROWS_WITH_AS(imports_of(idx, "missing.py"),
                         "file 'missing.py' not found in repository", FileNotInIndex);
}

TEST_CASE("resolve_entity returns spans and bodies") {
    TempDir dir;
    RepoIndex idx = build_small(dir);

    const CodeEntity& m = resolve_entity(idx, "pkg/b.py", "C.m");
    CHECK(m.kind == EntityKind::Method);
    CHECK(m.start_line == 2);
    CHECK(m.end_line == 3);
    CHECK(m.source_text == "    def m(self):\n        return 42");

    const CodeEntity& f = resolve_entity(idx, "a.py", "f");
    CHECK(f.start_line == 1);
    CHECK(f.end_line == 2);
}

TEST_CASE("resolve_entity suggests near misses") {
    TempDir dir;
    RepoIndex idx = build_small(dir);

    try {
        resolve_entity(idx, "pkg/b.py", "C.nope");
        FAIL("expected EntityNotFound");
    } catch (const EntityNotFound& e) {
        REQUIRE(e.suggestions().size() == 1);
        CHECK(e.suggestions()[0] == "C.m");
    }

    // same name defined in another file
    TempDir dir2;
    testsupport::write_small_fixture(dir2.path());
    dir2.write("other.py", "def f(y):\n    return y\n");
    RepoIndex idx2 = build_index(dir2.path());
    try {
        resolve_entity(idx2, "other.py", "g");
        FAIL("expected EntityNotFound");
    } catch (const EntityNotFound& e) {
        CHECK(e.suggestions().empty());
    }
    try {
        resolve_entity(idx2, "pkg/b.py", "f");
        FAIL("expected EntityNotFound");
    } catch (const EntityNotFound& e) {
        REQUIRE(e.suggestions().size() == 2);
        CHECK(e.suggestions()[0] == "a.py::f");
        CHECK(e.suggestions()[1] == "other.py::f");
    }
}

TEST_CASE("entities_overlapping maps ranges to functions") {
    TempDir dir;
    RepoIndex idx = build_small(dir);

    auto inside_method = entities_overlapping(idx, "pkg/b.py", 3, 3);
    REQUIRE(inside_method.size() == 1);
    CHECK(inside_method[0]->qualified_name == "C.m");

    auto whole_file = entities_overlapping(idx, "pkg/b.py", 1, 3);
    REQUIRE(whole_file.size() == 1);
    CHECK(whole_file[0]->qualified_name == "C.m");

    // class returned only when no contained method intersects
    TempDir dir2;
    dir2.write("cls.py",
               "class D:\n"
               "    LIMIT = 1\n"
               "\n"
               "    def m(self):\n"
               "        return 2\n");
    RepoIndex idx2 = build_index(dir2.path());
    auto class_only = entities_overlapping(idx2, "cls.py", 2, 2);
    REQUIRE(class_only.size() == 1);
    CHECK(class_only[0]->qualified_name == "D");
    auto with_method = entities_overlapping(idx2, "cls.py", 2, 4);
    REQUIRE(with_method.size() == 1);
    CHECK(with_method[0]->qualified_name == "D.m");

    // blank region between functions
    TempDir dir3;
    dir3.write("gap.py", "def a():\n    return 1\n\n\ndef b():\n    return 2\n");
    RepoIndex idx3 = build_index(dir3.path());
    CHECK(entities_overlapping(idx3, "gap.py", 3, 4).empty());

    CHECK_THROWS_AS(entities_overlapping(idx, "missing.py", 1, 2), FileNotInIndex);
}

TEST_CASE("persist/load round-trip is query-identical") {
    TempDir dir;
    RepoIndex idx = build_small(dir);
    const auto cache = dir.path() / "cache.json";
    persist_index(idx, cache);
    RepoIndex loaded = load_index(cache);

    CHECK(loaded.root_label() == idx.root_label());
    CHECK(loaded.revision_tag() == idx.revision_tag());
    CHECK(loaded.file_count() == idx.file_count());
    CHECK(loaded.entity_count() == idx.entity_count());
    CHECK(render_structure(loaded, 5) == render_structure(idx, 5));
    for (const CodeEntity& entity : idx.entities()) {
        const CodeEntity& other =
            resolve_entity(loaded, entity.relative_path, entity.qualified_name);
        CHECK(other.start_line == entity.start_line);
        CHECK(other.end_line == entity.end_line);
        CHECK(other.source_text == entity.source_text);
        CHECK(other.kind == entity.kind);
    }
    for (const SourceFileRecord& file : idx.files()) {
        REQUIRE(loaded.find_file(file.relative_path) != nullptr);
        CHECK(loaded.find_file(file.relative_path)->imports.size() == file.imports.size());
    }
}

TEST_CASE("load_index rejects corruption and old versions") {
    TempDir dir;
    RepoIndex idx = build_small(dir);
    const auto cache = dir.path() / "cache.json";
    persist_index(idx, cache);

    // truncated file
    {
        std::ifstream in(cache, std::ios::binary);
        std::ostringstream buffer;
        buffer << in.rdbuf();
        std::string text = buffer.str();
        std::ofstream out(cache, std::ios::binary | std::ios::trunc);
        out << text.substr(0, text.size() / 2);
    }
    CHECK_THROWS_AS(load_index(cache), CacheCorrupt);

    // older format version (no silent migration)
    persist_index(idx, cache);
    {
        std::ifstream in(cache, std::ios::binary);
        std::ostringstream buffer;
        buffer << in.rdbuf();
        std::string text = buffer.str();
        const std::string needle = "\"format_version\":1";
        auto pos = text.find(needle);
        REQUIRE(pos != std::string::npos);
        text.replace(pos, needle.size(), "\"format_version\":0");
        std::ofstream out(cache, std::ios::binary | std::ios::trunc);
        out << text;
    }
    CHECK_THROWS_AS(load_index(cache), CacheCorrupt);

    // checksum mismatch: payload edited in place
    persist_index(idx, cache);
    {
        std::ifstream in(cache, std::ios::binary);
        std::ostringstream buffer;
        buffer << in.rdbuf();
        std::string text = buffer.str();
        auto pos = text.find("\"revision_tag\":\"unversioned\"");
        REQUIRE(pos != std::string::npos);
        text.replace(pos, 29, "\"revision_tag\":\"forgedforge\"");
        std::ofstream out(cache, std::ios::binary | std::ios::trunc);
        out << text;
    }
    CHECK_THROWS_AS(load_index(cache), CacheCorrupt);

    CHECK_THROWS_AS(load_index(dir.path() / "missing.json"), CacheCorrupt);
}

TEST_CASE("determinism: two builds render and enumerate identically") {
    TempDir dir;
    RepoIndex first = build_small(dir);
    IndexConfig config;
    config.root_label = "fixture";
    RepoIndex second = build_index(dir.path(), config);

    CHECK(render_structure(first, 8) == render_structure(second, 8));
    REQUIRE(first.entity_count() == second.entity_count());
    for (const CodeEntity& entity : first.entities()) {
        const CodeEntity* other = second.find_entity(entity.relative_path,
                                                     entity.qualified_name);
        REQUIRE(other != nullptr);
        CHECK(other->start_line == entity.start_line);
        CHECK(other->source_text == entity.source_text);
    }
}

TEST_CASE("span fidelity: source_text equals the file slice") {
    TempDir dir;
    testsupport::write_small_fixture(dir.path());
    dir.write("models.py",
              "import dataclasses\n"
              "\n"
              "\n"
              "@dataclasses.dataclass\n"
              "class Point:\n"
              "    x: int = 0\n"
              "\n"
              "    def norm(self):\n"
              "        return abs(self.x)\n");
    RepoIndex idx = build_index(dir.path());
    for (const CodeEntity& entity : idx.entities()) {
        CHECK(entity.source_text ==
              file_slice(dir.path() / entity.relative_path, entity.start_line,
                         entity.end_line));
    }
}

TEST_CASE("containment: methods lie within their class span") {
    TempDir dir;
    testsupport::write_small_fixture(dir.path());
    RepoIndex idx = build_index(dir.path());
    for (const CodeEntity& entity : idx.entities()) {
        if (entity.kind != EntityKind::Method) {
            continue;
        }
        const std::string class_name =
            entity.qualified_name.substr(0, entity.qualified_name.find('.'));
        const CodeEntity* cls = idx.find_entity(entity.relative_path, class_name);
        REQUIRE(cls != nullptr);
        CHECK(cls->start_line <= entity.start_line);
        CHECK(cls->end_line >= entity.end_line);
    }
}

TEST_CASE("every enumerated entity resolves to itself") {
    TempDir dir;
    RepoIndex idx = build_small(dir);
    for (const SourceFileRecord& file : idx.files()) {
        for (const std::string& name : file.entity_names) {
            const CodeEntity& entity = resolve_entity(idx, file.relative_path, name);
            CHECK(entity.qualified_name == name);
            CHECK(entity.relative_path == file.relative_path);
        }
    }
}
