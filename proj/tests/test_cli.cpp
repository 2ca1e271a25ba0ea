// End-to-end checks of the command-line tool: spawns the built binary.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "fmdt/model_io.hpp"
#include "fmdt/partition.hpp"
#include "synth.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Workspace {
public:
    Workspace() {
        dir_ = fs::temp_directory_path() /
               ("fmdt_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
        fs::create_directories(dir_);
    }
    ~Workspace() {
        std::error_code ec;
        fs::remove_all(dir_, ec);
    }

    fs::path path(const std::string& name) const { return dir_ / name; }

    fs::path write(const std::string& name, const std::string& content) const {
        const fs::path p = path(name);
        std::ofstream out(p);
        out << content;
        return p;
    }

    RunResult run(const std::string& args) const {
        const fs::path out = path("stdout.txt"), err = path("stderr.txt");
        const std::string cmd = std::string(FMDT_CLI_PATH) + " " + args + " >" + out.string() +
                                " 2>" + err.string();
        const int status = std::system(cmd.c_str());
        RunResult r;
        r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = slurp(out);
        r.err = slurp(err);
        return r;
    }

private:
    static inline int counter_ = 0;
    fs::path dir_;
};

const char* kSchema = "x0,continuous\nx1,continuous\ny,class,neg|pos\n";

std::string gaussian_csv(std::size_t rows, std::uint64_t seed) {
    synth::Rng rng(seed);
    std::string csv;
    char buf[64];
    for (std::size_t r = 0; r < rows; ++r) {
        const int cls = static_cast<int>(r & 1);
        std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%s\n", rng.normal() + (cls ? 2.0 : 0.0),
                      rng.exponential(), cls ? "pos" : "neg");
        csv += buf;
    }
    return csv;
}

}  // namespace

TEST_CASE("usage and validation errors exit with code 2") {
    Workspace ws;
    ws.write("data.csv", gaussian_csv(50, 1));
    ws.write("schema.txt", kSchema);

    SUBCASE("missing schema file") {
        const auto r = ws.run("train -d " + ws.path("data.csv").string() + " -s " +
                              ws.path("nope.txt").string() + " -m " +
                              ws.path("model.json").string());
        CHECK(r.exit_code == 2);
        CHECK(r.err.find("schema file not found") != std::string::npos);
    }
    SUBCASE("missing data file") {
        const auto r = ws.run("train -d " + ws.path("nope.csv").string() + " -s " +
                              ws.path("schema.txt").string() + " -m " +
                              ws.path("model.json").string());
        CHECK(r.exit_code == 2);
    }
    SUBCASE("out-of-range fraction flags are rejected at parse time") {
        const auto r = ws.run("train -d " + ws.path("data.csv").string() + " -s " +
                              ws.path("schema.txt").string() + " -m " +
                              ws.path("model.json").string() + " --gamma 1.5");
        CHECK(r.exit_code == 2);
    }
    SUBCASE("unknown subcommand") {
        CHECK(ws.run("frobnicate").exit_code == 2);
    }
    SUBCASE("help exits cleanly") {
        CHECK(ws.run("--help").exit_code == 0);
    }
}

TEST_CASE("train writes a model and a summary") {
    Workspace ws;
    const auto data = ws.write("data.csv", gaussian_csv(300, 2));
    const auto schema = ws.write("schema.txt", kSchema);
    const std::string base = "train -d " + data.string() + " -s " + schema.string();

    SUBCASE("defaults are the documented ones") {
        const auto r = ws.run(base + " -m " + ws.path("model.json").string());
        REQUIRE(r.exit_code == 0);
        const nlohmann::json j =
            nlohmann::json::parse(slurp(ws.path("model.json")));
        CHECK(j.at("version") == "fmdt-pit/1");
        const auto& hp = j.at("hyperparameters");
        CHECK(hp.at("fuzzy_sets") == 5);
        CHECK(hp.at("quantiles") == 1000);
        CHECK(hp.at("max_depth") == 5);
        CHECK(hp.at("gamma") == 0.001);
        CHECK(hp.at("phi") == 0.02);
        CHECK(hp.at("lambda") == 1e-4);
        CHECK(hp.at("tnorm") == "product");
        CHECK(r.out.find("avg fuzzy sets: 5.00") != std::string::npos);
    }
    SUBCASE("--fuzzy-sets 7 reports 7.00 fuzzy sets") {
        const auto r = ws.run(base + " --fuzzy-sets 7 -m " + ws.path("m7.json").string());
        REQUIRE(r.exit_code == 0);
        CHECK(r.out.find("avg fuzzy sets: 7.00") != std::string::npos);
    }
    SUBCASE("retraining with the same seed is byte-identical") {
        REQUIRE(ws.run(base + " --seed 9 -m " + ws.path("a.json").string()).exit_code == 0);
        REQUIRE(ws.run(base + " --seed 9 -m " + ws.path("b.json").string()).exit_code == 0);
        CHECK(slurp(ws.path("a.json")) == slurp(ws.path("b.json")));
    }
    SUBCASE("--max-bins is accepted with a warning") {
        const auto r = ws.run(base + " --max-bins 32 -m " + ws.path("mb.json").string());
        CHECK(r.exit_code == 0);
        CHECK(r.err.find("--max-bins is ignored") != std::string::npos);
    }
}

TEST_CASE("predict") {
    Workspace ws;
    const auto schema = ws.write("schema.txt", kSchema);

    SUBCASE("pure-class training data predicts that class everywhere") {
        synth::Rng rng(3);
        std::string csv;
        for (int i = 0; i < 60; ++i)
            csv += std::to_string(rng.normal()) + "," + std::to_string(rng.exponential()) +
                   (i == 0 ? ",neg\n" : ",pos\n");
        // one token 'neg' row keeps both labels present; overwrite it below
        csv = csv.substr(csv.find('\n') + 1);
        csv = "0.0,0.5,pos\n" + csv;
        const auto data = ws.write("data.csv", csv);
        REQUIRE(ws.run("train -d " + data.string() + " -s " + schema.string() + " -m " +
                       ws.path("model.json").string())
                    .exit_code == 0);
        const auto r = ws.run("predict -d " + data.string() + " -s " + schema.string() + " -m " +
                              ws.path("model.json").string() + " -o " +
                              ws.path("preds.csv").string());
        REQUIRE(r.exit_code == 0);
        std::istringstream preds(slurp(ws.path("preds.csv")));
        std::string line;
        std::getline(preds, line);
        CHECK(line == "prediction,neg,pos");
        while (std::getline(preds, line)) CHECK(line.substr(0, 4) == "pos,");
    }

    SUBCASE("inference mode flag changes predictions on a crafted model") {
        fmdt::FMDTModel m;
        m.schema = {{"x", 0, fmdt::AttrKind::Continuous, {}}};
        m.class_labels = {"c0", "c1"};
        m.hp.fuzzy_sets = 2;
        fmdt::QuantileTable t;
        t.attribute_index = 0;
        t.q = 4;
        for (int i = 1; i < 4; ++i) t.anchors.push_back({i / 4.0, i / 4.0});
        m.tables = {t};
        m.partitions = {fmdt::build_uniform_partition(2, 0)};
        fmdt::TreeNode low, high, root;
        low.depth = high.depth = 1;
        low.cardinality = high.cardinality = 1.0;
        low.class_weights = {1.0, 0.0};
        high.class_weights = {0.25, 0.75};
        root.attribute = 0;
        root.cardinality = 2.0;
        root.children = {low, high};
        m.root = root;
        m.hp.inference = fmdt::InferenceMode::WeightedVote;  // the model's own default
        fmdt::save_model(m, ws.path("crafted.json").string());

        const auto xschema = ws.write("xschema.txt", "x,continuous\ny,class,c0|c1\n");
        const auto data = ws.write("x.csv", "0.6,c0\n");
        const std::string base = "predict -d " + data.string() + " -s " + xschema.string() +
                                 " -m " + ws.path("crafted.json").string() + " -o ";
        REQUIRE(ws.run(base + ws.path("mm.csv").string() + " --inference max-matching")
                    .exit_code == 0);
        REQUIRE(ws.run(base + ws.path("wv.csv").string() + " --inference weighted-vote")
                    .exit_code == 0);
        const std::string mm = slurp(ws.path("mm.csv"));
        const std::string wv = slurp(ws.path("wv.csv"));
        CHECK(mm.find("\nc1,") != std::string::npos);
        CHECK(wv.find("\nc0,") != std::string::npos);
        // without the flag the model's stored mode (weighted vote) applies
        REQUIRE(ws.run(base + ws.path("def.csv").string()).exit_code == 0);
        CHECK(slurp(ws.path("def.csv")) == wv);
    }

    SUBCASE("identical flags produce identical prediction bytes") {
        const auto data = ws.write("d.csv", gaussian_csv(80, 9));
        REQUIRE(ws.run("train -d " + data.string() + " -s " + schema.string() + " -m " +
                       ws.path("model.json").string())
                    .exit_code == 0);
        const std::string base = "predict -d " + data.string() + " -s " + schema.string() +
                                 " -m " + ws.path("model.json").string() + " -o ";
        REQUIRE(ws.run(base + ws.path("p1.csv").string()).exit_code == 0);
        REQUIRE(ws.run(base + ws.path("p2.csv").string()).exit_code == 0);
        CHECK(slurp(ws.path("p1.csv")) == slurp(ws.path("p2.csv")));
    }

    SUBCASE("malformed rows name the line, exit code 1") {
        const auto data = ws.write("good.csv", gaussian_csv(40, 4));
        REQUIRE(ws.run("train -d " + data.string() + " -s " + schema.string() + " -m " +
                       ws.path("model.json").string())
                    .exit_code == 0);
        const auto bad = ws.write("bad.csv", "1.0,2.0,pos\n2.0,1.0,neg\noops,1.0,pos\n");
        const auto r = ws.run("predict -d " + bad.string() + " -s " + schema.string() + " -m " +
                              ws.path("model.json").string() + " -o " +
                              ws.path("p.csv").string());
        CHECK(r.exit_code == 1);
        CHECK(r.err.find("line 3") != std::string::npos);
    }

    SUBCASE("schema mismatch between model and data exits with 2") {
        const auto data = ws.write("d.csv", gaussian_csv(40, 5));
        REQUIRE(ws.run("train -d " + data.string() + " -s " + schema.string() + " -m " +
                       ws.path("model.json").string())
                    .exit_code == 0);
        const auto other = ws.write("other_schema.txt", "a,continuous\nb,continuous\ny,class,neg|pos\n");
        const auto r = ws.run("predict -d " + data.string() + " -s " + other.string() + " -m " +
                              ws.path("model.json").string() + " -o " + ws.path("p.csv").string());
        CHECK(r.exit_code == 2);
        CHECK(r.err.find("does not match") != std::string::npos);
    }
}

TEST_CASE("partition dump") {
    Workspace ws;
    const auto schema = ws.write("schema.txt", kSchema);
    const auto data = ws.write("data.csv", gaussian_csv(200, 6));
    const auto r = ws.run("partition -d " + data.string() + " -s " + schema.string() +
                          " --fuzzy-sets 5 --quantiles 50 -o " + ws.path("dump").string());
    REQUIRE(r.exit_code == 0);

    SUBCASE("five rows per continuous attribute") {
        std::istringstream sets(slurp(ws.path("dump.partition.csv")));
        std::string line;
        std::getline(sets, line);
        CHECK(line ==
              "attribute,set_index,left,core,right,original_left,original_core,original_right");
        int x0 = 0, x1 = 0;
        while (std::getline(sets, line)) {
            if (line.rfind("x0,", 0) == 0) ++x0;
            if (line.rfind("x1,", 0) == 0) ++x1;
        }
        CHECK(x0 == 5);
        CHECK(x1 == 5);
    }
    SUBCASE("quantile table JSON is written") {
        const nlohmann::json j = nlohmann::json::parse(slurp(ws.path("dump.quantiles.json")));
        CHECK(j.at("quantiles").size() == 2);
        CHECK(j.at("quantiles").at(0).at("q") == 50);
    }
    SUBCASE("identical flags produce identical dump bytes") {
        const auto r2 = ws.run("partition -d " + data.string() + " -s " + schema.string() +
                               " --fuzzy-sets 5 --quantiles 50 -o " + ws.path("dump2").string());
        REQUIRE(r2.exit_code == 0);
        CHECK(slurp(ws.path("dump.partition.csv")) == slurp(ws.path("dump2.partition.csv")));
        CHECK(slurp(ws.path("dump.quantiles.json")) == slurp(ws.path("dump2.quantiles.json")));
    }

    SUBCASE("constant attributes trigger a warning") {
        std::string csv;
        for (int i = 0; i < 40; ++i)
            csv += "3.5," + std::to_string(i * 0.1) + (i % 2 ? ",pos\n" : ",neg\n");
        const auto cdata = ws.write("const.csv", csv);
        const auto cr = ws.run("partition -d " + cdata.string() + " -s " + schema.string() +
                               " -o " + ws.path("cdump").string());
        CHECK(cr.exit_code == 0);
        CHECK(cr.err.find("constant") != std::string::npos);
    }
}

TEST_CASE("cross-validation subcommand") {
    Workspace ws;
    const auto schema = ws.write("schema.txt", kSchema);
    const auto data = ws.write("data.csv", gaussian_csv(400, 8));
    const std::string base = "cv -d " + data.string() + " -s " + schema.string() +
                             " --quantiles 50 -o ";

    SUBCASE("default five folds, report sections present") {
        const auto r = ws.run(base + ws.path("report.json").string() + " --folds-out " +
                              ws.path("folds.csv").string());
        REQUIRE(r.exit_code == 0);
        const nlohmann::json j = nlohmann::json::parse(slurp(ws.path("report.json")));
        CHECK(j.at("k") == 5);
        CHECK(j.at("folds").size() == 5);
        CHECK(j.at("complexity").contains("leaves_mean"));
        CHECK(j.at("complexity").contains("avg_depth_mean"));
        CHECK(j.at("complexity").contains("avg_fuzzy_sets_mean"));
        CHECK(j.at("timings").contains("partitioning_s"));
        std::istringstream folds(slurp(ws.path("folds.csv")));
        std::string line;
        std::getline(folds, line);
        CHECK(line == "row_index,fold");
        int rows = 0;
        while (std::getline(folds, line))
            if (!line.empty()) ++rows;
        CHECK(rows == 400);
    }
    SUBCASE("reruns agree apart from timings") {
        REQUIRE(ws.run(base + ws.path("r1.json").string()).exit_code == 0);
        REQUIRE(ws.run(base + ws.path("r2.json").string()).exit_code == 0);
        nlohmann::json a = nlohmann::json::parse(slurp(ws.path("r1.json")));
        nlohmann::json b = nlohmann::json::parse(slurp(ws.path("r2.json")));
        a.erase("timings");
        b.erase("timings");
        for (auto& f : a.at("folds"))
            for (const char* k : {"partitioning_s", "learning_s", "total_s"}) f.erase(k);
        for (auto& f : b.at("folds"))
            for (const char* k : {"partitioning_s", "learning_s", "total_s"}) f.erase(k);
        CHECK(a.dump() == b.dump());
    }
    SUBCASE("unknown positive class is a usage error") {
        const auto r = ws.run(base + ws.path("r.json").string() + " --positive-class zzz");
        CHECK(r.exit_code == 2);
    }
}
