method linear_combo(x: int, y: int) returns (r: int)
  ensures r == 3 * x + 2 * y
{
  r := 3 * x + 2 * y;
}
