method double_linear(a: int, b: int) returns (r: int)
  ensures r == a + a - b
{
  r := 2 * a - b;
}
