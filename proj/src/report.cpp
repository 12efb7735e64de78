#include <hedgebo/experiment.hpp>

#include <cstdio>
#include <fstream>

namespace hedgebo {

namespace {

// 17 significant digits round-trip a double exactly.
std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open for writing", path);
    }
    out << content;
    out.flush();
    if (!out) {
        throw IoError("write failed", path);
    }
}

}  // namespace

std::string format_csv(const AggregateReport& report) {
    std::string out = "iteration,mean_gap,var_gap,mean_cum_regret\n";
    for (std::size_t i = 0; i < report.mean_gap.size(); ++i) {
        out += std::to_string(i + 1);
        out += ',';
        out += num(report.mean_gap[i]);
        out += ',';
        out += num(report.var_gap[i]);
        out += ',';
        out += num(report.mean_cum_regret[i]);
        out += '\n';
    }
    return out;
}

void emit_csv(const AggregateReport& report, const std::string& path) {
    write_file(path, format_csv(report));
}

std::string format_plotdata(std::span<const AggregateReport> reports) {
    std::string out;
    for (std::size_t r = 0; r < reports.size(); ++r) {
        const AggregateReport& rep = reports[r];
        if (r > 0) {
            out += "\n\n";
        }
        out += "# series " + rep.series + "\n";
        out += "# iteration mean_gap var_gap mean_cum_regret";
        for (const auto& label : rep.arm_labels) {
            out += " freq[" + label + "]";
        }
        out += '\n';
        for (std::size_t i = 0; i < rep.mean_gap.size(); ++i) {
            out += std::to_string(i + 1) + ' ' + num(rep.mean_gap[i]) + ' ' + num(rep.var_gap[i]) + ' ' +
                   num(rep.mean_cum_regret[i]);
            // Rows of the initial design have no selection.
            const bool has_selection = i >= rep.initial_points && i - rep.initial_points < rep.arm_frequency.size();
            for (std::size_t a = 0; a < rep.arm_labels.size(); ++a) {
                out += ' ';
                out += has_selection ? num(rep.arm_frequency[i - rep.initial_points][a]) : "nan";
            }
            out += '\n';
        }
    }
    return out;
}

void emit_plotdata(std::span<const AggregateReport> reports, const std::string& path) {
    write_file(path, format_plotdata(reports));
}

}  // namespace hedgebo
