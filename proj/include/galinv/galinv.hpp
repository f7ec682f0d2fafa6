#pragma once

#include "galinv/cli.hpp"
#include "galinv/envelope.hpp"
#include "galinv/galilean.hpp"
#include "galinv/invariants.hpp"
#include "galinv/matrix.hpp"
#include "galinv/orbitreduce.hpp"
#include "galinv/parallel.hpp"
#include "galinv/polyring.hpp"
#include "galinv/rational.hpp"
#include "galinv/verify.hpp"
