#include "harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "rng.hpp"

namespace meda::harness {

using data::Dataset;
using data::ScenarioSplit;
using models::Model;
using models::ModelSpec;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            if (!trim(cur).empty()) out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (!trim(cur).empty()) out.push_back(trim(cur));
    return out;
}

bool to_bool(const std::string& v) {
    if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "off" || v == "0" || v == "no") return false;
    raise(errc::invalid_argument, "expected a boolean, got '" + v + "'");
}

double to_double(const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        require(pos == v.size() && std::isfinite(x), errc::invalid_argument, "bad number");
        return x;
    } catch (const Error&) {
        throw;
    } catch (...) {
        raise(errc::invalid_argument, "expected a number, got '" + v + "'");
    }
}

long to_long(const std::string& v) {
    try {
        std::size_t pos = 0;
        const long x = std::stol(v, &pos);
        require(pos == v.size(), errc::invalid_argument, "bad integer");
        return x;
    } catch (const Error&) {
        throw;
    } catch (...) {
        raise(errc::invalid_argument, "expected an integer, got '" + v + "'");
    }
}

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

std::string format_g6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::uint64_t cell_seed(std::uint64_t seed, const std::string& source, const std::string& target,
                        Model model) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    h = hash_str(h, source);
    h = hash_str(h, target);
    h = hash_str(h, models::to_string(model));
    return hash_mix(h, seed);
}

ModelSpec spec_for(const ExperimentConfig& cfg, Model model) {
    ModelSpec spec = cfg.hyper;
    spec.model = model;
    if (model == Model::bl) spec.p = 0.0;  // baseline: plain ridge on raw features
    return spec;
}

struct FittedCell {
    ScenarioSplit split;
    models::FitResult fit;
    ModelSpec spec;
    double fit_ms = 0.0;
};

FittedCell fit_cell(const Dataset& source, const Dataset& target, const ExperimentConfig& cfg,
                    Model model, std::uint64_t seed, const std::string& source_name,
                    const std::string& target_name) {
    FittedCell cell;
    cell.spec = spec_for(cfg, model);
    cell.split = data::build_scenario(source, target, cfg.scenario, cfg.labeled_per_class,
                                      cell_seed(seed, source_name, target_name, model));
    if (cfg.standardize) {
        const auto stats = data::feature_stats(cell.split.x_all);
        cell.split.x_all = data::standardize(stats, cell.split.x_all);
        cell.split.x_labeled = data::standardize(stats, cell.split.x_labeled);
        cell.split.test_x = data::standardize(stats, cell.split.test_x);
    }
    if (cfg.add_bias) {
        cell.split.x_all = data::append_bias_column(cell.split.x_all);
        cell.split.x_labeled = data::append_bias_column(cell.split.x_labeled);
        cell.split.test_x = data::append_bias_column(cell.split.test_x);
    }
    const double t0 = now_ms();
    cell.fit = models::fit(cell.spec, cell.split);
    cell.fit_ms = now_ms() - t0;
    return cell;
}

ResultRecord evaluate_cell(const FittedCell& cell, const ExperimentConfig& cfg, Classifier cls,
                           const std::string& source_name, const std::string& target_name,
                           std::uint64_t seed) {
    const double t0 = now_ms();
    const ScenarioSplit& sp = cell.split;
    const Mat test_denoised = sp.test_x * cell.fit.w;

    std::vector<int> pred;
    switch (cls) {
        case Classifier::ridge: {
            const Mat z = cell.fit.z_l
                              ? *cell.fit.z_l
                              : models::fit_ridge_marginalized(cell.fit.w, sp.x_labeled, sp.y_labeled,
                                                               cell.spec.p, cell.spec.delta);
            pred = classify::predict_linear(test_denoised, z);
            break;
        }
        case Classifier::nn: {
            const Mat train = sp.x_labeled * cell.fit.w;
            pred = classify::nn_classify(train, sp.labels_labeled, test_denoised);
            break;
        }
        case Classifier::dscm: {
            const Mat train = sp.x_labeled * cell.fit.w;
            std::vector<int> doms;
            doms.reserve(sp.domains_labeled.size());
            for (Domain d : sp.domains_labeled) doms.push_back(d == Domain::source ? 0 : 1);
            pred = classify::dscm_classify(train, sp.labels_labeled, doms, sp.class_count,
                                           test_denoised, cfg.sigma);
            break;
        }
    }

    std::vector<int> pred_known, truth_known;
    for (std::size_t i = 0; i < sp.test_labels.size(); ++i) {
        if (sp.test_labels[i] < 0) continue;  // no ground truth for this row
        pred_known.push_back(pred[i]);
        truth_known.push_back(sp.test_labels[i]);
    }
    require(!truth_known.empty(), errc::invalid_argument,
            "no test row carries a ground-truth label; accuracy is undefined");

    ResultRecord rec;
    rec.source = source_name;
    rec.target = target_name;
    rec.scenario = cfg.scenario;
    rec.model = cell.spec.model;
    rec.classifier = cls;
    rec.seed = seed;
    rec.accuracy = classify::accuracy(pred_known, truth_known);
    rec.iterations = cell.fit.iterations;
    rec.converged = cell.fit.converged;
    rec.jitter_used = cell.fit.jitter_used;
    rec.wall_time_ms = cfg.timing ? (cell.fit_ms + (now_ms() - t0)) : 0.0;
    return rec;
}

void sort_records(std::vector<ResultRecord>& records) {
    std::sort(records.begin(), records.end(), [](const ResultRecord& a, const ResultRecord& b) {
        if (a.source != b.source) return a.source < b.source;
        if (a.target != b.target) return a.target < b.target;
        const std::string_view sa = to_string(a.scenario), sb = to_string(b.scenario);
        if (sa != sb) return sa < sb;
        const std::string_view ma = models::to_string(a.model), mb = models::to_string(b.model);
        if (ma != mb) return ma < mb;
        const std::string_view ca = to_string(a.classifier), cb = to_string(b.classifier);
        if (ca != cb) return ca < cb;
        return a.seed < b.seed;
    });
}

std::vector<AggregateRow> aggregate_records(const std::vector<ResultRecord>& records) {
    std::map<std::pair<std::string, std::string>, std::pair<Model, Classifier>> keys;
    std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
    for (const auto& r : records) {
        const std::pair<std::string, std::string> key{models::to_string(r.model), to_string(r.classifier)};
        keys.emplace(key, std::pair{r.model, r.classifier});
        groups[key].push_back(r.accuracy);
    }
    std::vector<AggregateRow> rows;
    for (const auto& [key, accs] : groups) {
        AggregateRow row;
        row.model = keys.at(key).first;
        row.classifier = keys.at(key).second;
        row.n = accs.size();
        double mean = 0.0;
        for (double a : accs) mean += a;
        mean /= static_cast<double>(accs.size());
        double var = 0.0;
        for (double a : accs) var += (a - mean) * (a - mean);
        var /= static_cast<double>(accs.size());
        row.mean = mean;
        row.stddev = std::sqrt(var);
        rows.push_back(row);
    }
    return rows;
}

std::string render_config(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "domains =";
    for (const auto& [name, path] : cfg.domains) os << " " << name << ":" << path;
    os << "\nscenario = " << to_string(cfg.scenario) << "\nmodels =";
    for (Model m : cfg.model_list) os << " " << models::to_string(m);
    os << "\nclassifiers =";
    for (Classifier c : cfg.classifier_list) os << " " << to_string(c);
    os << "\nseeds =";
    for (auto s : cfg.seeds) os << " " << s;
    os << "\nnoise = " << format_g6(cfg.hyper.p) << "\nlambda = " << format_g6(cfg.hyper.lambda)
       << "\ngamma = " << format_g6(cfg.hyper.gamma) << "\nomega = " << format_g6(cfg.hyper.omega)
       << "\ndelta = " << format_g6(cfg.hyper.delta) << "\nalpha = " << format_g6(cfg.hyper.alpha)
       << "\nmax_iters = " << cfg.hyper.max_iters << "\nrel_tol = " << format_g6(cfg.hyper.rel_tol)
       << "\ncoupling_rule = " << marginalize::to_string(cfg.hyper.coupling_rule)
       << "\nlabeled_per_class = " << cfg.labeled_per_class
       << "\nstandardize = " << (cfg.standardize ? "true" : "false")
       << "\nadd_bias = " << (cfg.add_bias ? "true" : "false")
       << "\ntiming = " << (cfg.timing ? "true" : "false") << "\nsigma = " << format_g6(cfg.sigma)
       << "\nformat = "
       << (cfg.format == FileFormat::autodetect ? "auto"
                                                : (cfg.format == FileFormat::dense ? "dense" : "sparse"))
       << "\noutput = " << cfg.output_dir << "\n";
    return os.str();
}

} // namespace

Classifier classifier_from_string(std::string_view s) {
    if (s == "ridge") return Classifier::ridge;
    if (s == "nn") return Classifier::nn;
    if (s == "dscm") return Classifier::dscm;
    raise(errc::invalid_argument, "unknown classifier '" + std::string(s) + "' (expected ridge|nn|dscm)");
}

const char* to_string(Classifier c) {
    switch (c) {
        case Classifier::ridge: return "ridge";
        case Classifier::nn:    return "nn";
        case Classifier::dscm:  return "dscm";
    }
    return "?";
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    if (key.rfind("domain.", 0) == 0) {
        const std::string name = key.substr(7);
        require(!name.empty(), errc::invalid_argument, "empty domain name");
        for (auto& [n, p] : domains)
            if (n == name) {
                p = value;
                return;
            }
        domains.emplace_back(name, value);
    } else if (key == "scenario") {
        scenario = scenario_from_string(value);
    } else if (key == "models" || key == "model") {
        model_list.clear();
        for (const auto& tok : split_list(value)) model_list.push_back(models::model_from_string(tok));
        require(!model_list.empty(), errc::invalid_argument, "empty model list");
    } else if (key == "classifiers" || key == "classifier") {
        classifier_list.clear();
        for (const auto& tok : split_list(value)) classifier_list.push_back(classifier_from_string(tok));
        require(!classifier_list.empty(), errc::invalid_argument, "empty classifier list");
    } else if (key == "seeds") {
        seeds.clear();
        for (const auto& tok : split_list(value)) seeds.push_back(static_cast<std::uint64_t>(to_long(tok)));
        require(!seeds.empty(), errc::invalid_argument, "empty seed list");
    } else if (key == "noise" || key == "p") {
        hyper.p = to_double(value);
    } else if (key == "lambda") {
        hyper.lambda = to_double(value);
    } else if (key == "gamma") {
        hyper.gamma = to_double(value);
    } else if (key == "omega") {
        hyper.omega = to_double(value);
    } else if (key == "delta") {
        hyper.delta = to_double(value);
    } else if (key == "alpha") {
        hyper.alpha = to_double(value);
    } else if (key == "max_iters") {
        hyper.max_iters = static_cast<int>(to_long(value));
    } else if (key == "rel_tol") {
        hyper.rel_tol = to_double(value);
    } else if (key == "coupling_rule") {
        hyper.coupling_rule = marginalize::coupling_rule_from_string(value);
    } else if (key == "labeled_per_class") {
        const long n = to_long(value);
        require(n >= 1, errc::invalid_argument, "labeled_per_class must be at least 1");
        labeled_per_class = static_cast<std::size_t>(n);
    } else if (key == "standardize") {
        standardize = to_bool(value);
    } else if (key == "add_bias") {
        add_bias = to_bool(value);
    } else if (key == "timing") {
        timing = to_bool(value);
    } else if (key == "sigma") {
        sigma = to_double(value);
    } else if (key == "format") {
        if (value == "auto")
            format = FileFormat::autodetect;
        else if (value == "dense")
            format = FileFormat::dense;
        else if (value == "sparse")
            format = FileFormat::sparse;
        else
            raise(errc::invalid_argument, "unknown format '" + value + "' (expected auto|dense|sparse)");
    } else if (key == "output" || key == "dir") {
        output_dir = value;
    } else {
        raise(errc::invalid_argument, "unknown configuration key '" + key + "'");
    }
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(errc::io_error, "cannot open config '" + path + "'");
    ExperimentConfig cfg;
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            raise(errc::parse_error, path + ":" + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (section == "domains")
                cfg.set("domain." + key, value);
            else
                cfg.set(key, value);
        } catch (const Error& e) {
            raise(errc::parse_error, path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return cfg;
}

Dataset load_dataset(const std::string& path, FileFormat format) {
    if (format == FileFormat::dense) return data::load_dense(path);
    if (format == FileFormat::sparse) return data::load_sparse(path);
    std::ifstream in(path);
    if (!in) raise(errc::io_error, "cannot open '" + path + "'");
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        return line.find(',') != std::string::npos ? data::load_dense(path) : data::load_sparse(path);
    }
    raise(errc::parse_error, path + ": no data rows");
}

ValidationReport validate(const ExperimentConfig& cfg) {
    ValidationReport rep;
    auto flag = [&rep](const std::string& msg) { rep.violations.push_back(msg); };

    if (cfg.domains.size() < 2) flag("need at least two domains, got " + std::to_string(cfg.domains.size()));
    if (cfg.model_list.empty()) flag("model list is empty");
    if (cfg.classifier_list.empty()) flag("classifier list is empty");
    if (cfg.seeds.empty()) flag("seed list is empty");
    if (cfg.sigma <= 0.0) flag("sigma must be positive");
    try {
        ModelSpec probe = cfg.hyper;
        probe.validate();
    } catch (const Error& e) {
        flag(e.what());
    }

    std::vector<std::pair<std::string, Dataset>> loaded;
    for (const auto& [name, path] : cfg.domains) {
        if (!std::filesystem::exists(path)) {
            flag("domain '" + name + "': missing file " + path);
            continue;
        }
        try {
            loaded.emplace_back(name, load_dataset(path, cfg.format));
        } catch (const Error& e) {
            flag("domain '" + name + "': " + e.what());
        }
    }

    if (!loaded.empty()) {
        const std::size_t d = loaded.front().second.dim();
        int classes = 0;
        for (const auto& [name, ds] : loaded) {
            if (ds.dim() != d)
                flag("domain '" + name + "' has dimensionality " + std::to_string(ds.dim()) +
                     ", expected " + std::to_string(d));
            classes = std::max(classes, ds.class_count);
        }
        if (classes < 2) flag("fewer than two classes across the domains");
        for (const auto& [name, ds] : loaded) {
            std::size_t unlabeled = 0;
            for (int l : ds.labels)
                if (l < 0) ++unlabeled;
            if (unlabeled > 0)
                flag("domain '" + name + "' has " + std::to_string(unlabeled) +
                     " unlabeled rows; it cannot act as a source domain");
            if (cfg.scenario != Scenario::us) {
                for (int c = 0; c < classes; ++c) {
                    std::size_t have = 0;
                    for (int l : ds.labels)
                        if (l == c) ++have;
                    if (have < cfg.labeled_per_class)
                        flag("InsufficientTargetLabels: domain '" + name + "' class " + std::to_string(c) +
                             " has " + std::to_string(have) + " labeled rows, scenario needs " +
                             std::to_string(cfg.labeled_per_class));
                }
            }
        }
    }

    rep.resolved_config = render_config(cfg);
    return rep;
}

ResultRecord run_cell(const Dataset& source, const Dataset& target, const std::string& source_name,
                      const std::string& target_name, const ExperimentConfig& cfg, Model model,
                      Classifier cls, std::uint64_t seed) {
    const FittedCell cell = fit_cell(source, target, cfg, model, seed, source_name, target_name);
    return evaluate_cell(cell, cfg, cls, source_name, target_name, seed);
}

RunResult run(const ExperimentConfig& cfg) {
    require(cfg.domains.size() >= 2, errc::invalid_argument, "need at least two domains");
    require(!cfg.model_list.empty() && !cfg.classifier_list.empty() && !cfg.seeds.empty(),
            errc::invalid_argument, "models, classifiers and seeds must be nonempty");

    std::vector<std::pair<std::string, Dataset>> sets;
    for (const auto& [name, path] : cfg.domains) sets.emplace_back(name, load_dataset(path, cfg.format));

    RunResult out;
    for (std::size_t si = 0; si < sets.size(); ++si)
        for (std::size_t ti = 0; ti < sets.size(); ++ti) {
            if (si == ti) continue;
            const auto& [sname, src] = sets[si];
            const auto& [tname, tgt] = sets[ti];
            for (Model model : cfg.model_list)
                for (std::uint64_t seed : cfg.seeds) {
                    FittedCell cell;
                    try {
                        cell = fit_cell(src, tgt, cfg, model, seed, sname, tname);
                    } catch (const Error& e) {
                        out.failures.push_back(sname + "->" + tname + " model=" +
                                               models::to_string(model) + " seed=" + std::to_string(seed) +
                                               ": " + e.what());
                        continue;
                    }
                    for (Classifier cls : cfg.classifier_list) {
                        try {
                            out.records.push_back(evaluate_cell(cell, cfg, cls, sname, tname, seed));
                        } catch (const Error& e) {
                            out.failures.push_back(sname + "->" + tname + " model=" +
                                                   models::to_string(model) + " classifier=" +
                                                   to_string(cls) + " seed=" + std::to_string(seed) +
                                                   ": " + e.what());
                        }
                    }
                }
        }

    sort_records(out.records);
    out.aggregate = aggregate_records(out.records);
    return out;
}

void emit(const RunResult& result, const ExperimentConfig& cfg, const std::string& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) raise(errc::io_error, "cannot create output directory '" + out_dir + "'");

    {
        std::ofstream csv(out_dir + "/records.csv");
        if (!csv) raise(errc::io_error, "cannot write records.csv");
        csv << "source,target,scenario,model,classifier,seed,accuracy,iterations,wall_time_ms,converged\n";
        for (const auto& r : result.records)
            csv << r.source << ',' << r.target << ',' << to_string(r.scenario) << ','
                << models::to_string(r.model) << ',' << to_string(r.classifier) << ',' << r.seed << ','
                << format_g6(r.accuracy) << ',' << r.iterations << ',' << format_g6(r.wall_time_ms) << ','
                << (r.converged ? 1 : 0) << '\n';
    }
    {
        std::ofstream agg(out_dir + "/aggregate.txt");
        if (!agg) raise(errc::io_error, "cannot write aggregate.txt");
        agg << "# resolved configuration\n";
        std::istringstream cfg_lines(render_config(cfg));
        std::string line;
        while (std::getline(cfg_lines, line)) agg << "# " << line << "\n";
        std::size_t jittered = 0;
        for (const auto& r : result.records)
            if (r.jitter_used) ++jittered;
        agg << "# records = " << result.records.size() << ", failures = " << result.failures.size()
            << ", jittered = " << jittered << "\n";
        for (const auto& row : result.aggregate)
            agg << "model=" << models::to_string(row.model) << " classifier=" << to_string(row.classifier)
                << " mean=" << format_g6(row.mean) << " std=" << format_g6(row.stddev) << " n=" << row.n
                << "\n";
    }
    if (!result.failures.empty()) {
        std::ofstream fl(out_dir + "/failures.txt");
        for (const auto& f : result.failures) fl << f << "\n";
    }
}

std::vector<SweepRow> sweep(const ExperimentConfig& base, std::span<const double> lambdas,
                            std::span<const double> gammas, std::span<const double> ps) {
    const std::vector<double> ls = lambdas.empty() ? std::vector<double>{base.hyper.lambda}
                                                   : std::vector<double>(lambdas.begin(), lambdas.end());
    const std::vector<double> gs = gammas.empty() ? std::vector<double>{base.hyper.gamma}
                                                  : std::vector<double>(gammas.begin(), gammas.end());
    const std::vector<double> qs = ps.empty() ? std::vector<double>{base.hyper.p}
                                              : std::vector<double>(ps.begin(), ps.end());

    std::vector<SweepRow> rows;
    for (double l : ls)
        for (double g : gs)
            for (double p : qs) {
                ExperimentConfig cfg = base;
                cfg.hyper.lambda = l;
                cfg.hyper.gamma = g;
                cfg.hyper.p = p;
                const RunResult rr = run(cfg);
                for (const auto& a : rr.aggregate)
                    rows.push_back({l, g, p, a.model, a.classifier, a.mean, a.stddev, a.n});
            }

    std::error_code ec;
    std::filesystem::create_directories(base.output_dir, ec);
    if (ec) raise(errc::io_error, "cannot create output directory '" + base.output_dir + "'");
    std::ofstream csv(base.output_dir + "/sweep.csv");
    if (!csv) raise(errc::io_error, "cannot write sweep.csv");
    csv << "lambda,gamma,p,model,classifier,mean_accuracy,std,n\n";
    for (const auto& r : rows)
        csv << format_g6(r.lambda) << ',' << format_g6(r.gamma) << ',' << format_g6(r.p) << ','
            << models::to_string(r.model) << ',' << to_string(r.classifier) << ',' << format_g6(r.mean)
            << ',' << format_g6(r.stddev) << ',' << r.n << '\n';
    return rows;
}

} // namespace meda::harness
