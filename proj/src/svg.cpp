#include "cfshift/svg.hpp"

#include <cstdio>

namespace cfshift {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string escape(const std::string& s) {
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

}  // namespace

SvgWriter::SvgWriter(double width, double height) : width_(width), height_(height) {}

void SvgWriter::line(double x1, double y1, double x2, double y2, const std::string& stroke,
                     double stroke_width, double opacity) {
    body_ << "  <line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2)
          << "\" y2=\"" << num(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\""
          << num(stroke_width) << "\" stroke-opacity=\"" << num(opacity) << "\"/>\n";
}

void SvgWriter::polyline(const std::vector<std::pair<double, double>>& points,
                         const std::string& stroke, double stroke_width, double opacity) {
    body_ << "  <polyline points=\"";
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (i) body_ << ' ';
        body_ << num(points[i].first) << ',' << num(points[i].second);
    }
    body_ << "\" fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << num(stroke_width)
          << "\" stroke-opacity=\"" << num(opacity) << "\"/>\n";
}

void SvgWriter::circle(double cx, double cy, double r, const std::string& fill,
                       const std::string& stroke, double opacity) {
    body_ << "  <circle cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\"" << num(r)
          << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\" fill-opacity=\""
          << num(opacity) << "\"/>\n";
}

void SvgWriter::rect(double x, double y, double w, double h, const std::string& fill,
                     const std::string& stroke) {
    body_ << "  <rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w)
          << "\" height=\"" << num(h) << "\" fill=\"" << fill << "\" stroke=\"" << stroke
          << "\"/>\n";
}

void SvgWriter::text(double x, double y, const std::string& content, double size,
                     const std::string& fill) {
    body_ << "  <text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-family=\"sans-serif\""
          << " font-size=\"" << num(size) << "\" fill=\"" << fill << "\">" << escape(content)
          << "</text>\n";
}

std::string SvgWriter::str() const {
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width_) + "\" height=\"" +
           num(height_) + "\" viewBox=\"0 0 " + num(width_) + " " + num(height_) + "\">\n";
    out += body_.str();
    out += "</svg>\n";
    return out;
}

}  // namespace cfshift
