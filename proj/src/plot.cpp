#include "newscast/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "newscast/csv.hpp"
#include "newscast/errors.hpp"

namespace newscast {

namespace {

constexpr double kWidth = 800, kHeight = 450;
constexpr double kLeft = 80, kRight = 20, kTop = 40, kBottom = 60;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? header.size() : static_cast<std::size_t>(it - header.begin());
}

}  // namespace

std::string render_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                              const std::vector<PlotSeries>& series, const std::string& x_first,
                              const std::string& x_last) {
    double lo = INFINITY, hi = -INFINITY;
    std::size_t longest = 0;
    for (const auto& s : series) {
        for (double v : s.values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        longest = std::max(longest, s.values.size());
    }
    if (longest == 0) throw ArgumentError("nothing to plot");
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto x_of = [&](std::size_t i) {
        return kLeft + (longest == 1 ? plot_w / 2 : plot_w * static_cast<double>(i) / static_cast<double>(longest - 1));
    };
    auto y_of = [&](double v) { return kTop + plot_h * (hi - v) / (hi - lo); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << num(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"16\">" << xml_escape(title) << "</text>\n";
    svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\"" << plot_h
        << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double v = lo + (hi - lo) * k / 4.0;
        const double y = y_of(v);
        svg << "<line x1=\"" << kLeft << "\" y1=\"" << num(y) << "\" x2=\"" << kLeft + plot_w << "\" y2=\"" << num(y)
            << "\" stroke=\"#ddd\"/>\n";
        svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\" "
            << "font-family=\"sans-serif\" font-size=\"11\">" << tick(v) << "</text>\n";
    }
    const double base = kTop + plot_h;
    svg << "<text x=\"" << kLeft << "\" y=\"" << base + 16 << "\" font-family=\"sans-serif\" font-size=\"11\">"
        << xml_escape(x_first.empty() ? "0" : x_first) << "</text>\n";
    svg << "<text x=\"" << kLeft + plot_w << "\" y=\"" << base + 16
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << xml_escape(x_last.empty() ? std::to_string(longest - 1) : x_last) << "</text>\n";
    svg << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\"" << kHeight - 16
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << xml_escape(x_label)
        << "</text>\n";
    svg << "<text x=\"18\" y=\"" << num(kTop + plot_h / 2) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"13\" transform=\"rotate(-90 18 " << num(kTop + plot_h / 2) << ")\">" << xml_escape(y_label)
        << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const auto& ser = series[s];
        svg << "<polyline fill=\"none\" stroke=\"" << ser.color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < ser.values.size(); ++i) {
            if (i) svg << ' ';
            svg << num(x_of(i)) << ',' << num(y_of(ser.values[i]));
        }
        svg << "\"/>\n";
        const double ly = kTop + 16 + 16 * static_cast<double>(s);
        svg << "<line x1=\"" << kLeft + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << kLeft + 32 << "\" y2=\"" << ly - 4
            << "\" stroke=\"" << ser.color << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << kLeft + 38 << "\" y=\"" << ly << "\" font-family=\"sans-serif\" font-size=\"12\">"
            << xml_escape(ser.label) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

std::filesystem::path plot_csv(const std::filesystem::path& input, const std::filesystem::path& out_dir) {
    const auto rows = csv::read_file(input);
    if (rows.size() < 2) throw FormatError("'" + input.string() + "' has no data rows");
    const auto& header = rows.front().fields;

    auto read_column = [&](std::size_t col, const char* name) {
        std::vector<double> values;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            double v = 0.0;
            if (col >= rows[i].fields.size() || !csv::parse_real(rows[i].fields[col], v)) {
                throw FormatError(std::string("bad ") + name + " value", rows[i].line);
            }
            values.push_back(v);
        }
        return values;
    };

    std::string svg;
    const auto train_col = column(header, "train_loss");
    const auto val_col = column(header, "val_loss");
    const auto pred_col = column(header, "predicted_close");
    const auto actual_col = column(header, "actual_close");
    if (train_col < header.size() && val_col < header.size()) {
        const auto epoch_col = column(header, "epoch");
        std::string first, last;
        if (epoch_col < header.size()) {
            first = rows[1].fields.at(epoch_col);
            last = rows.back().fields.at(epoch_col);
        }
        svg = render_line_chart("Training and validation loss", "Epoch", "MSE (normalized)",
                                {{"train", read_column(train_col, "train_loss"), "#1f77b4"},
                                 {"validation", read_column(val_col, "val_loss"), "#d62728"}},
                                first, last);
    } else if (pred_col < header.size() && actual_col < header.size()) {
        const auto date_col = column(header, "date");
        std::string first, last;
        if (date_col < header.size()) {
            first = rows[1].fields.at(date_col);
            last = rows.back().fields.at(date_col);
        }
        svg = render_line_chart("Predicted and actual close", "Trading day", "Close",
                                {{"actual", read_column(actual_col, "actual_close"), "#333333"},
                                 {"predicted", read_column(pred_col, "predicted_close"), "#ff7f0e"}},
                                first, last);
    } else {
        throw FormatError("'" + input.string() + "' is neither a loss history nor a prediction file", 1);
    }

    std::filesystem::create_directories(out_dir);
    const auto path = out_dir / (input.stem().string() + ".svg");
    csv::write_atomic(path, svg);
    return path;
}

}  // namespace newscast
