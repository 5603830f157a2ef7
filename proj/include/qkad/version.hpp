#pragma once

#define QKAD_VERSION "0.1.0"
