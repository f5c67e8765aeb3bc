#include <doctest.h>

#include <random>

#include "stars/corpus.hpp"
#include "stars/error.hpp"
#include "stars/lexicon.hpp"
#include "test_support.hpp"

using namespace stars;
using test_support::TempDir;
using test_support::write_file;

namespace {

std::string company_line(const std::string& id, const std::string& name,
                         const std::string& gt_ids) {
    return "{\"id\":\"" + id + "\",\"name\":\"" + name +
           "\",\"documents\":[{\"id\":\"" + id +
           "-d1\",\"source_type\":\"webpage\",\"text\":\"Text for " + name +
           ".\"}],\"ground_truth_tech_ids\":[" + gt_ids + "]}\n";
}

}  // namespace

TEST_CASE("load_corpus validates and cross-checks ground truth") {
    TempDir tmp;
    write_file(tmp.file("corpus.jsonl"),
               company_line("c1", "One", "\"blockchain\",\"ai\"") +
                   company_line("c2", "Two", ""));
    const auto lexicon = test_support::mini_lexicon();
    const auto corpus = load_corpus(tmp.file("corpus.jsonl"), lexicon);
    CHECK(corpus.size() == 2);
    CHECK(corpus.at("c1").ground_truth_tech_ids ==
          std::set<std::string>{"ai", "blockchain"});
    CHECK(corpus.at("c2").ground_truth_tech_ids.empty());
}

TEST_CASE("load_corpus scales to a crawled-size dataset") {
    TempDir tmp;
    std::string body;
    for (int i = 0; i < 6597; ++i) {
        body += company_line("c" + std::to_string(i), "Company " + std::to_string(i),
                             "\"ai\"");
    }
    write_file(tmp.file("big.jsonl"), body);
    const auto corpus =
        load_corpus(tmp.file("big.jsonl"), test_support::mini_lexicon());
    CHECK(corpus.size() == 6597);
}

TEST_CASE("load_corpus: unresolvable ground truth, strict vs lenient") {
    TempDir tmp;
    write_file(tmp.file("corpus.jsonl"),
               company_line("c1", "One", "\"not-a-tech\""));
    const auto lexicon = test_support::mini_lexicon();

    CHECK_THROWS_WITH_AS(
        load_corpus(tmp.file("corpus.jsonl"), lexicon, GroundTruthValidation::Strict),
        doctest::Contains("c1"), ValidationError);

    const auto lenient = load_corpus(tmp.file("corpus.jsonl"), lexicon,
                                     GroundTruthValidation::Lenient);
    CHECK(lenient.at("c1").ground_truth_tech_ids.empty());
}

TEST_CASE("load_corpus: a company may carry many technologies") {
    TempDir tmp;
    std::vector<Technology> techs;
    std::string gt;
    for (int i = 0; i < 11; ++i) {
        const std::string id = "t" + std::to_string(i);
        techs.push_back({id, "Tech " + std::to_string(i), "Def.",
                         DefinitionSource::CuratedFile, {}});
        if (!gt.empty()) gt += ",";
        gt += "\"" + id + "\"";
    }
    TechnologyLexicon lexicon(std::move(techs), {});
    write_file(tmp.file("corpus.jsonl"), company_line("c1", "One", gt));
    const auto corpus = load_corpus(tmp.file("corpus.jsonl"), lexicon);
    CHECK(corpus.at("c1").ground_truth_tech_ids.size() == 11);
}

TEST_CASE("load_corpus rejects empty document text and duplicate ids") {
    TempDir tmp;
    write_file(tmp.file("dup.jsonl"),
               company_line("c1", "One", "") + company_line("c1", "One again", ""));
    const auto lexicon = test_support::mini_lexicon();
    CHECK_THROWS_AS(load_corpus(tmp.file("dup.jsonl"), lexicon), ValidationError);

    write_file(tmp.file("blank.jsonl"),
               "{\"id\":\"c1\",\"name\":\"One\",\"documents\":[{\"id\":\"d\","
               "\"source_type\":\"webpage\",\"text\":\"   \"}],"
               "\"ground_truth_tech_ids\":[]}\n");
    CHECK_THROWS_AS(load_corpus(tmp.file("blank.jsonl"), lexicon), ValidationError);
}

TEST_CASE("loading is deterministic: same bytes, same corpus") {
    const auto lexicon = load_lexicon(test_support::fixture_dir() / "lexicon.jsonl");
    const auto a = load_corpus(test_support::fixture_dir() / "corpus.jsonl", lexicon);
    const auto b = load_corpus(test_support::fixture_dir() / "corpus.jsonl", lexicon);
    CHECK(a.companies() == b.companies());
    CHECK(a.size() == 10);
}

TEST_CASE("ground_truth projects per-company sets without aliasing") {
    Company c1{"c1", "One", {{"d", SourceType::Webpage, "x"}}, {"a", "b"}};
    Company c2{"c2", "Two", {{"d", SourceType::Webpage, "x"}}, {"a"}};
    Corpus corpus({c1, c2});
    auto gt = ground_truth(corpus);
    CHECK(gt.size() == 2);
    CHECK(gt["c1"] == std::set<std::string>{"a", "b"});
    gt["c1"].erase("a");
    CHECK(ground_truth(corpus)["c1"].count("a") == 1);  // fresh copy each call
}

TEST_CASE("ground_truth of an empty corpus is empty") {
    CHECK(ground_truth(Corpus{}).empty());
    CHECK(tech_to_companies(Corpus{}).empty());
}

TEST_CASE("tech_to_companies inverts ground_truth") {
    Company c1{"c1", "One", {{"d", SourceType::Webpage, "x"}}, {"a"}};
    Company c2{"c2", "Two", {{"d", SourceType::Webpage, "x"}}, {"a", "b"}};
    Company c3{"c3", "Three", {{"d", SourceType::Webpage, "x"}}, {}};
    Corpus corpus({c1, c2, c3});
    const auto inv = tech_to_companies(corpus);
    CHECK(inv.size() == 2);
    CHECK(inv.at("a") == std::set<std::string>{"c1", "c2"});
    CHECK(inv.at("b") == std::set<std::string>{"c2"});
    // empty-set company appears nowhere
    for (const auto& [tech, companies] : inv) CHECK(companies.count("c3") == 0);
}

TEST_CASE("inversion duality on randomized small corpora") {
    // Oracle: brute-force membership check in both directions.
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n_companies = 1 + rng() % 20;
        const std::size_t n_techs = 1 + rng() % 10;
        std::vector<Company> companies;
        for (std::size_t i = 0; i < n_companies; ++i) {
            Company c;
            c.id = "c" + std::to_string(i);
            c.name = "Company " + std::to_string(i);
            c.documents = {{"d", SourceType::Other, "text"}};
            for (std::size_t t = 0; t < n_techs; ++t) {
                if (rng() % 3 == 0) {
                    c.ground_truth_tech_ids.insert("t" + std::to_string(t));
                }
            }
            companies.push_back(std::move(c));
        }
        Corpus corpus(companies);
        const auto gt = ground_truth(corpus);
        const auto inv = tech_to_companies(corpus);

        for (const auto& [cid, techs] : gt) {
            for (const auto& tid : techs) {
                REQUIRE(inv.count(tid) == 1);
                REQUIRE(inv.at(tid).count(cid) == 1);
            }
        }
        for (const auto& [tid, cids] : inv) {
            for (const auto& cid : cids) {
                REQUIRE(gt.at(cid).count(tid) == 1);
            }
        }

        // inverting twice reproduces the original map (dropping empties)
        std::map<std::string, std::set<std::string>> twice;
        for (const auto& [tid, cids] : inv) {
            for (const auto& cid : cids) twice[cid].insert(tid);
        }
        std::map<std::string, std::set<std::string>> original_nonempty;
        for (const auto& [cid, techs] : gt) {
            if (!techs.empty()) original_nonempty[cid] = techs;
        }
        REQUIRE(twice == original_nonempty);
    }
}
