#include <cstdio>
#include <vector>

void kernel_18(double *a, double *b, double *c, std::vector<double> &v, int n, int m)
{
    int i, j;
    double s = 0.0, t = 0.0, mx = 0.0, off = 1.0, last = 0.0;

    #pragma omp parallel
    for (int i = 0; i < n; i++) { /* uns-012 */
        for (int k = 0; k < m; k++)
            c[k] += a[i];
    }

    #pragma omp parallel for private(t) reduction(max:mx)
    for (int i = 0; i < n; i++) { /* pos-038 */
        t = a[i] * a[i];
        mx = t > mx ? t : mx;
    }

    for (int k = 0; k < n; k++) { /* neg-034 */
        a[k] = a[k - 1] + b[k];
    }

    for (auto &x : v) { /* neg-035 */
        x *= 2.0;
    }
    c[0] = s + t + mx + last;
}
