#include "data.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "rng.hpp"

namespace meda::data {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& tok, std::size_t line, const std::string& path) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v))
        raise(errc::parse_error, path + ":" + std::to_string(line) + ": bad numeric value '" + tok + "'");
    return v;
}

int parse_label(const std::string& tok, std::size_t line, const std::string& path) {
    errno = 0;
    char* end = nullptr;
    const long v = std::strtol(tok.c_str(), &end, 10);
    if (end == tok.c_str() || *end != '\0' || errno == ERANGE)
        raise(errc::parse_error, path + ":" + std::to_string(line) + ": bad label '" + tok + "'");
    return static_cast<int>(v);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

int finish_class_count(const std::vector<int>& labels) {
    int c = 0;
    for (int l : labels) c = std::max(c, l + 1);
    return c;
}

void append_rows(Mat& dst, std::size_t& next, const Mat& src, std::span<const std::size_t> rows) {
    for (std::size_t r : rows) {
        for (std::size_t j = 0; j < src.cols(); ++j) dst(next, j) = src(r, j);
        ++next;
    }
}

} // namespace

Dataset load_dense(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(errc::io_error, "cannot open '" + path + "'");

    Dataset ds;
    std::vector<double> values;
    std::size_t width = 0;
    std::size_t line_no = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto toks = split(line, ',');
        if (width == 0) {
            width = toks.size();
            if (width < 3)
                raise(errc::parse_error,
                      path + ":" + std::to_string(line_no) + ": need at least one feature, a label and a domain");
        } else if (toks.size() != width) {
            raise(errc::inconsistent_width, path + ":" + std::to_string(line_no) + ": expected " +
                                                std::to_string(width) + " fields, got " + std::to_string(toks.size()));
        }
        const std::size_t d = width - 2;
        for (std::size_t j = 0; j < d; ++j) values.push_back(parse_double(trim(toks[j]), line_no, path));
        ds.labels.push_back(parse_label(trim(toks[d]), line_no, path));
        const std::string dom = trim(toks[d + 1]);
        if (dom.empty()) raise(errc::parse_error, path + ":" + std::to_string(line_no) + ": empty domain token");
        ds.domains.push_back(dom);
    }
    if (width == 0) raise(errc::parse_error, path + ": no data rows");
    ds.features = Mat(ds.labels.size(), width - 2, std::move(values));
    ds.class_count = finish_class_count(ds.labels);
    return ds;
}

Dataset load_sparse(const std::string& path, std::size_t dim_override) {
    std::ifstream in(path);
    if (!in) raise(errc::io_error, "cannot open '" + path + "'");

    struct Row {
        int label;
        std::string domain;
        std::vector<std::pair<std::size_t, double>> entries;
    };
    std::vector<Row> rows;
    std::size_t max_idx = 0;
    bool any_entry = false;
    std::size_t line_no = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        Row row;
        std::string tok;
        if (!(ls >> tok)) continue;
        row.label = parse_label(tok, line_no, path);
        if (!(ls >> row.domain))
            raise(errc::parse_error, path + ":" + std::to_string(line_no) + ": missing domain token");
        std::set<std::size_t> seen;
        while (ls >> tok) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos)
                raise(errc::parse_error, path + ":" + std::to_string(line_no) + ": expected idx:val, got '" + tok + "'");
            const std::string idx_tok = tok.substr(0, colon);
            errno = 0;
            char* end = nullptr;
            const long idx = std::strtol(idx_tok.c_str(), &end, 10);
            if (end == idx_tok.c_str() || *end != '\0' || errno == ERANGE)
                raise(errc::parse_error, path + ":" + std::to_string(line_no) + ": bad index in '" + tok + "'");
            if (idx < 0)
                raise(errc::negative_index, path + ":" + std::to_string(line_no) + ": negative feature index");
            const std::size_t uidx = static_cast<std::size_t>(idx);
            if (!seen.insert(uidx).second)
                raise(errc::parse_error,
                      path + ":" + std::to_string(line_no) + ": duplicate index " + std::to_string(uidx));
            const double val = parse_double(tok.substr(colon + 1), line_no, path);
            row.entries.emplace_back(uidx, val);
            max_idx = std::max(max_idx, uidx);
            any_entry = true;
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) raise(errc::parse_error, path + ": no data rows");

    std::size_t d = dim_override > 0 ? dim_override : (any_entry ? max_idx + 1 : 0);
    if (d == 0) raise(errc::parse_error, path + ": cannot infer dimensionality from an all-empty file");
    if (dim_override > 0 && any_entry && max_idx >= dim_override)
        raise(errc::parse_error, path + ": feature index " + std::to_string(max_idx) +
                                     " exceeds requested dimensionality " + std::to_string(dim_override));

    Dataset ds;
    ds.features = Mat(rows.size(), d);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        ds.labels.push_back(rows[i].label);
        ds.domains.push_back(rows[i].domain);
        for (const auto& [idx, val] : rows[i].entries) ds.features(i, idx) = val;
    }
    ds.class_count = finish_class_count(ds.labels);
    return ds;
}

void save_dense(const Dataset& ds, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) raise(errc::io_error, "cannot write '" + path + "'");
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        for (std::size_t j = 0; j < ds.dim(); ++j) std::fprintf(f, "%.17g,", ds.features(i, j));
        std::fprintf(f, "%d,%s\n", ds.labels[i], ds.domains[i].c_str());
    }
    std::fclose(f);
}

ScenarioSplit build_scenario(const Dataset& source, const Dataset& target, Scenario scenario,
                             std::size_t labeled_per_class, std::uint64_t seed) {
    require(source.rows() >= 1 && target.rows() >= 1, errc::invalid_argument, "both domains need at least one row");
    require(source.dim() == target.dim(), errc::dimension_mismatch,
            "feature dimensionality differs: " + std::to_string(source.dim()) + " vs " +
                std::to_string(target.dim()));
    const int class_count = std::max(source.class_count, target.class_count);
    require(class_count >= 2, errc::invalid_argument, "need at least two classes");
    for (std::size_t i = 0; i < source.rows(); ++i)
        require(source.labels[i] >= 0, errc::invalid_argument,
                "source row " + std::to_string(i) + " is unlabeled; all source rows must carry labels");

    const std::size_t ns = source.rows();
    const std::size_t nt = target.rows();
    const std::size_t d = source.dim();

    ScenarioSplit sp;
    sp.scenario = scenario;
    sp.class_count = class_count;

    // pick labeled target rows (SUP/SS)
    if (scenario != Scenario::us) {
        Rng rng(seed);
        for (int c = 0; c < class_count; ++c) {
            std::vector<std::size_t> pool;
            for (std::size_t i = 0; i < nt; ++i)
                if (target.labels[i] == c) pool.push_back(i);
            if (pool.size() < labeled_per_class)
                raise(errc::insufficient_target_labels,
                      "class " + std::to_string(c) + " has " + std::to_string(pool.size()) +
                          " labeled target rows, need " + std::to_string(labeled_per_class));
            rng.shuffle(pool);
            pool.resize(labeled_per_class);
            sp.labeled_target_rows.insert(sp.labeled_target_rows.end(), pool.begin(), pool.end());
        }
        std::sort(sp.labeled_target_rows.begin(), sp.labeled_target_rows.end());
    }

    // test rows: every target row not drawn into the labeled set
    {
        std::set<std::size_t> held(sp.labeled_target_rows.begin(), sp.labeled_target_rows.end());
        for (std::size_t i = 0; i < nt; ++i)
            if (!held.count(i)) sp.test_rows.push_back(i);
    }

    const std::size_t n_lt = sp.labeled_target_rows.size();
    const std::size_t n_test = sp.test_rows.size();

    // x_all: source rows first, then labeled target, then (US/SS) the rest
    const std::size_t n_all = (scenario == Scenario::sup) ? ns + n_lt : ns + nt;
    sp.x_all = Mat(n_all, d);
    std::size_t next = 0;
    for (std::size_t i = 0; i < ns; ++i) {
        for (std::size_t j = 0; j < d; ++j) sp.x_all(next, j) = source.features(i, j);
        ++next;
    }
    sp.domain_tags.assign(ns, Domain::source);
    sp.labels_all = source.labels;

    append_rows(sp.x_all, next, target.features, sp.labeled_target_rows);
    for (std::size_t r : sp.labeled_target_rows) {
        sp.domain_tags.push_back(Domain::target);
        sp.labels_all.push_back(target.labels[r]);
    }
    if (scenario != Scenario::sup) {
        append_rows(sp.x_all, next, target.features, sp.test_rows);
        for (std::size_t i = 0; i < n_test; ++i) {
            sp.domain_tags.push_back(Domain::target);
            sp.labels_all.push_back(kUnlabeled);
        }
    }

    // labeled block: source plus sampled target rows
    sp.x_labeled = Mat(ns + n_lt, d);
    next = 0;
    for (std::size_t i = 0; i < ns; ++i) {
        for (std::size_t j = 0; j < d; ++j) sp.x_labeled(next, j) = source.features(i, j);
        ++next;
    }
    append_rows(sp.x_labeled, next, target.features, sp.labeled_target_rows);
    sp.labels_labeled = source.labels;
    sp.domains_labeled.assign(ns, Domain::source);
    for (std::size_t r : sp.labeled_target_rows) {
        sp.labels_labeled.push_back(target.labels[r]);
        sp.domains_labeled.push_back(Domain::target);
    }
    sp.y_labeled = make_label_matrix(sp.labels_labeled, class_count);

    sp.test_x = Mat(n_test, d);
    next = 0;
    append_rows(sp.test_x, next, target.features, sp.test_rows);
    for (std::size_t r : sp.test_rows) sp.test_labels.push_back(target.labels[r]);

    return sp;
}

Mat make_label_matrix(std::span<const int> labels, int class_count) {
    require(class_count >= 1, errc::invalid_argument, "class_count must be positive");
    Mat y(labels.size(), static_cast<std::size_t>(class_count));
    for (double& v : y.mutable_data()) v = -1.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        require(labels[i] >= 0 && labels[i] < class_count, errc::label_out_of_range,
                "label " + std::to_string(labels[i]) + " at row " + std::to_string(i) + " outside [0," +
                    std::to_string(class_count) + ")");
        y(i, static_cast<std::size_t>(labels[i])) = 1.0;
    }
    return y;
}

FeatureStats feature_stats(const Mat& stats_from) {
    require(stats_from.rows() > 0, errc::invalid_argument, "statistics source has no rows");
    const std::size_t n = stats_from.rows(), d = stats_from.cols();
    FeatureStats st;
    st.mean.assign(d, 0.0);
    st.scale.assign(d, 1.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) st.mean[j] += stats_from(i, j);
    for (double& m : st.mean) m /= static_cast<double>(n);
    std::vector<double> var(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            const double c = stats_from(i, j) - st.mean[j];
            var[j] += c * c;
        }
    for (std::size_t j = 0; j < d; ++j) {
        var[j] /= static_cast<double>(n);
        if (var[j] >= 1e-12) st.scale[j] = std::sqrt(var[j]);
    }
    return st;
}

Mat standardize(const FeatureStats& stats, const Mat& apply_to) {
    require(stats.mean.size() == apply_to.cols(), errc::dimension_mismatch,
            "standardize: statistics dimensionality mismatch");
    Mat out = apply_to;
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) = (out(i, j) - stats.mean[j]) / stats.scale[j];
    return out;
}

Mat standardize(const Mat& stats_from, const Mat& apply_to) {
    return standardize(feature_stats(stats_from), apply_to);
}

Mat append_bias_column(const Mat& x) {
    Mat out(x.rows(), x.cols() + 1);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) = x(i, j);
        out(i, x.cols()) = 1.0;
    }
    return out;
}

std::pair<Dataset, Dataset> synth_shift(std::uint64_t seed, std::size_t d, int class_count,
                                        std::size_t n_per_class, double shift_magnitude,
                                        double rotation_angle) {
    require(d >= 2, errc::invalid_argument, "synth_shift needs d >= 2");
    require(class_count >= 2, errc::invalid_argument, "synth_shift needs at least two classes");
    require(n_per_class >= 1, errc::invalid_argument, "synth_shift needs n_per_class >= 1");

    Rng rng(seed);
    const std::size_t c = static_cast<std::size_t>(class_count);

    Mat centers(c, d);
    for (double& v : centers.mutable_data()) v = 0.8 * rng.normal();

    std::vector<double> shift(d, 0.0);
    {
        double norm = 0.0;
        for (double& v : shift) {
            v = rng.normal();
            norm += v * v;
        }
        norm = std::sqrt(norm);
        for (double& v : shift) v *= shift_magnitude / (norm > 0 ? norm : 1.0);
    }

    // orthonormal 2-plane (e1, e2) for the rotation
    std::vector<double> e1(d), e2(d);
    double n1 = 0.0;
    for (double& v : e1) {
        v = rng.normal();
        n1 += v * v;
    }
    n1 = std::sqrt(n1);
    for (double& v : e1) v /= n1;
    double proj = 0.0, n2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) e2[j] = rng.normal();
    for (std::size_t j = 0; j < d; ++j) proj += e2[j] * e1[j];
    for (std::size_t j = 0; j < d; ++j) {
        e2[j] -= proj * e1[j];
        n2 += e2[j] * e2[j];
    }
    n2 = std::sqrt(n2);
    for (double& v : e2) v /= n2;

    const double cs = std::cos(rotation_angle), sn = std::sin(rotation_angle);
    auto rotate = [&](std::vector<double>& x) {
        double a = 0.0, b = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            a += e1[j] * x[j];
            b += e2[j] * x[j];
        }
        for (std::size_t j = 0; j < d; ++j)
            x[j] += (cs - 1.0) * (a * e1[j] + b * e2[j]) + sn * (a * e2[j] - b * e1[j]);
    };

    auto draw = [&](bool is_target) {
        Dataset ds;
        ds.class_count = class_count;
        ds.features = Mat(c * n_per_class, d);
        std::size_t row = 0;
        std::vector<double> x(d);
        for (std::size_t cls = 0; cls < c; ++cls)
            for (std::size_t k = 0; k < n_per_class; ++k) {
                for (std::size_t j = 0; j < d; ++j) x[j] = centers(cls, j) + rng.normal();
                if (is_target) {
                    rotate(x);
                    for (std::size_t j = 0; j < d; ++j) x[j] += shift[j];
                }
                for (std::size_t j = 0; j < d; ++j) ds.features(row, j) = x[j];
                ds.labels.push_back(static_cast<int>(cls));
                ds.domains.push_back(is_target ? "target" : "source");
                ++row;
            }
        return ds;
    };

    Dataset source = draw(false);
    Dataset target = draw(true);
    return {std::move(source), std::move(target)};
}

} // namespace meda::data
