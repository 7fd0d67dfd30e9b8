#ifndef CFSHIFT_SVG_HPP
#define CFSHIFT_SVG_HPP

#include <sstream>
#include <string>
#include <vector>

namespace cfshift {

/// Minimal SVG builder: enough shapes for the two chart kinds, plain text
/// output, no dependencies. Coordinates are written with fixed precision
/// so repeated runs emit identical bytes.
class SvgWriter {
public:
    SvgWriter(double width, double height);

    void line(double x1, double y1, double x2, double y2, const std::string& stroke,
              double stroke_width = 1.0, double opacity = 1.0);
    void polyline(const std::vector<std::pair<double, double>>& points, const std::string& stroke,
                  double stroke_width = 1.0, double opacity = 1.0);
    void circle(double cx, double cy, double r, const std::string& fill,
                const std::string& stroke = "none", double opacity = 1.0);
    void rect(double x, double y, double w, double h, const std::string& fill,
              const std::string& stroke = "none");
    void text(double x, double y, const std::string& content, double size = 12.0,
              const std::string& fill = "#000000");

    std::string str() const;

private:
    double width_;
    double height_;
    std::ostringstream body_;
};

}  // namespace cfshift

#endif
