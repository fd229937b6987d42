#pragma once

#include "superconv/errors.hpp"
#include "superconv/linalg.hpp"
#include "superconv/series.hpp"
#include "superconv/averaging.hpp"
#include "superconv/models.hpp"
#include "superconv/kolmogorov.hpp"
#include "superconv/rayleigh_schrodinger.hpp"
#include "superconv/report.hpp"
